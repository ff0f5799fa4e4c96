#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gflow/fenwick.hpp"
#include "gflow/jl.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// Heavy-hitter / norm / sampler state on one balanced lossy expander.
// Deletion-only; queries may mutate state (internal resets), so there is no
// shared read path. One owner per instance.
class ExpanderHh {
 public:
  struct Config {
    double eps_ad = 1e-8;
    double phi = 0.05;          // expansion the caller certifies for the graph
    uint64_t seed = 1;
    double lambda2_smooth_lb = 0.0;  // caller certificate; <=0 means phi^2/2
    double reset_test_c = 5e6;       // QueryHeavy reset threshold constant
    double vertex_test_div = 6.0;    // eps/6 endpoint test
    bool debug_checks = false;       // dense JL cross-check per query
    bool strict_preconditions = false;
  };

  struct Stats {
    long queries = 0;
    long deletes = 0;
    long resets_query = 0;   // resets fired inside QueryHeavy/Norm/Sample preambles
    long resets_delete = 0;  // resets fired by the edge-halving rule
    long candidate_work = 0;
    long filter_evals = 0;
    long jl_checks = 0;
    long jl_violations_102 = 0;   // dense-checked sketch outside the 1.02 band
    long renorm_violations = 0;   // Rayleigh > 3x last-reset value after a Delete
    long sample_draws = 0;
  };

  ExpanderHh(const LossyGraph& g, Config cfg, Vec tau_bar);

  int live_edge_count() const { return m_live_; }
  int live_vertex_count() const { return n_live_; }
  bool edge_alive(int e) const { return alive_edge_[e]; }
  const Stats& stats() const { return stats_; }
  const LossyGraph& graph() const { return g_; }
  double rayleigh_at_reset() const { return ray_at_reset_; }
  double current_rayleigh() const;

  void del(const std::vector<int>& f);
  void scale_tau(int e, double b);
  double tau(int e) const { return fen_tau_.value(e); }

  // exactly {e : |(B_G h)_e| >= eps}
  std::vector<int> query_heavy(const Vec& h, double eps);
  double norm_estimate(const Vec& h);
  // sparse diagonal of R as (edge, accumulated weight) pairs
  std::vector<std::pair<int, double>> sample(const Vec& h, double c0, double c1b, double c2b,
                                             double c3);
  // untruncated per-edge sampling weights q_e and their sum S for the same
  // query preamble; q is indexed by edge id, 0 for dead edges.
  std::pair<Vec, double> sample_weights(const Vec& h, double c1b, double c2b, double c3);

  double row_value(int e, const Vec& h) const;  // (B_G h)_e

 private:
  struct QueryState {
    Vec g, gperp;
    double vtg = 0.0;        // v^T g
    double gv_norm = 0.0;    // ||g^v||
    double gperp_nsq = 0.0;  // ||g^perp||^2
    double t = 0.0;
  };

  void reset();
  QueryState preamble(const Vec& h, bool* did_reset);
  void remove_edge(int e);
  void check_renormalization();

  LossyGraph g_;
  Config cfg_;
  Rng rng_;
  Vec degree_init_;  // fixed D from initialization (smoothed degrees)
  std::vector<std::vector<int>> adj_;      // live edge ids per vertex
  std::vector<std::pair<int, int>> epos_;  // position of e in adj of (tail, head)
  std::vector<char> alive_edge_, alive_vertex_;
  std::vector<int> deg_cur_;  // live degree per vertex
  std::vector<int> live_edges_;
  std::vector<int> live_pos_;
  int m_live_ = 0, n_live_ = 0;

  // reset-scoped eigen state
  Vec v0_;  // eigenvector at last reset (entries for then-live vertices)
  double v_scale_ = 1.0;
  double v_norm2_ = 1.0;  // norm^2 of v0 restricted to live vertices
  Vec u0_;                // B D^{-1/2} v0 at last reset
  double u_scale_ = 1.0;
  std::vector<std::pair<double, int>> sorted_u_;  // (|u0|, edge) descending
  Fenwick fen_u2_;   // u0_e^2
  Fenwick fen_tau_;  // tau_bar
  JlSketch jl_;
  Mat m_sketch_;  // M = J B_G, k x n
  int m_at_reset_ = 0;
  double ray_at_reset_ = 0.0;
  int reset_epoch_ = 0;

  std::vector<int> mark_;  // query-scoped dedupe stamps
  int mark_epoch_ = 0;
  Stats stats_;
};

}  // namespace gflow
