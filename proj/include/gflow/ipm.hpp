#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gflow/lp_instance.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// two-sided log barrier for l < x < u
struct BarrierEval {
  Vec phi, d1, d2;
};
BarrierEval barrier_eval(const Vec& x, const Vec& l, const Vec& u);

struct ModifiedLp {
  LpInstance lp;   // modified instance: m + n rows
  int m_orig = 0;  // original row count
  int n = 0;
  double beta = 1.0, delta_prime = 0.0, xi = 0.0, mu_init = 0.0, delta = 0.0;
  double eps = 0.0;     // centrality epsilon (1 / (4 C log(m/n)))
  double gamma = 0.0;   // Def-7.9 gamma
  double c_norm = 0.0;  // C / (1 - p)
  double c_const = 100.0;
  double c1_guard = 1.0;  // max(||c||_1, 1)
  std::vector<char> aux_flat;  // aux rows for zero residuals (cost 0, tiny box)
};

struct CenteredPoint {
  Vec x, s, z;  // Abar z + s = cbar
  double mu = 0.0;
  Vec tau;  // regularized Lewis weights at x
};

struct CentralityReport {
  double centrality = 0.0;   // Def 7.9 (1)
  double dual_resid = 0.0;   // Def 7.9 (2), exact identity residual
  double feas_norm = 0.0;    // Def 7.9 (3), inverse-Gram norm
  double feas_linf = 0.0;
  double objective = 0.0;
};

struct IpmTraceRow {
  double mu, centrality, feasibility, objective;
  int newton_steps;
};

struct PathStats {
  long steps = 0;
  long newton_total = 0;
  double max_centrality = 0.0;      // raw Def-7.9 centrality maximum
  double max_centrality_eff = 0.0;  // beyond the representable barrier granularity
  long resolution_stalls = 0;       // recenterings stopped at machine resolution
  double max_feas_norm = 0.0;
  double max_dual_resid = 0.0;
  long objective_monotone_violations = 0;
  double phi2_log_ratio = 0.0;  // log(max/min phi''^{1/2}) seen on the path
  std::vector<IpmTraceRow> trace;
};

ModifiedLp initialize_lp(const LpInstance& inst, double delta, double c_const = 100.0);
CenteredPoint initial_point(const ModifiedLp& mlp);
CentralityReport centrality_report(const ModifiedLp& mlp, const CenteredPoint& pt);

// Predictor-corrector path following with exact Newton solves.
CenteredPoint path_following(const ModifiedLp& mlp, CenteredPoint start, double mu_final,
                             PathStats* stats = nullptr, bool want_trace = false);

struct FinalPoint {
  Vec x, s;
  double objective = 0.0;
  double feas_linf = 0.0;
};
FinalPoint final_point(const ModifiedLp& mlp, const CenteredPoint& pt);

struct LpSolveReport {
  Vec x;  // original m coordinates
  double objective = 0.0;
  double feas_linf = 0.0;
  double aux_mass = 0.0;
  double aux_bound = 0.0;  // Lemma-7.10 style mass bound; > 10x declares infeasible
  bool infeasible = false;
  double mu_final = 0.0;
  PathStats path;
};
LpSolveReport solve_two_sparse_lp(const LpInstance& inst, double delta, bool want_trace = false);

struct FlowReport {
  Vec flow;
  double value = 0.0;      // maxflow: im(f)_t; mincost: c^T f
  double imbalance_linf = 0.0;
  bool infeasible = false;
  LpSolveReport lp;
};

// gamma-form inputs: edge (tail, head, gamma, weight=capacity slot unused)
FlowReport solve_generalized_mincost(int n, const std::vector<LossyEdge>& gamma_edges,
                                     const Vec& cost, const Vec& capacity, const Vec& demand,
                                     double delta, bool want_trace = false);
FlowReport solve_generalized_maxflow(int n, const std::vector<LossyEdge>& gamma_edges, int s,
                                     int t, const Vec& capacity, double delta,
                                     bool want_trace = false);

}  // namespace gflow
