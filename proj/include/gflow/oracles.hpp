#pragma once

#include <cstdint>
#include <vector>

#include "gflow/lp_instance.hpp"
#include "gflow/lossy_graph.hpp"

// Brute-force references. These share no numerical kernels with the data
// structures and solvers they check.
namespace gflow::oracle {

// {i : |(A h)_i| >= eps} by full scan.
std::vector<int> exact_heavy_set(const TwoSparseMatrix& a, const Vec& h, double eps);
// same, with a per-row scale: |g_i (A h)_i| >= eps
std::vector<int> exact_heavy_set_scaled(const TwoSparseMatrix& a, const Vec& g, const Vec& h,
                                        double eps);

// leverage scores by fully dense arithmetic (independent of linsolve)
Vec dense_leverage_scores(const Mat& a);

struct LpOracleResult {
  bool feasible = false;
  double opt = 0.0;
  Vec x;
};

// Exact optimum by enumerating basic solutions: choose n free rows, put the
// rest at their bounds, solve the n x n system. Floating point with 1e-7
// feasibility slack and lexicographic basis order.
LpOracleResult lp_vertex_enumerate(const LpInstance& inst);

// Independent second route: bounded-variable primal simplex (Bland's rule).
LpOracleResult lp_simplex(const LpInstance& inst);

}  // namespace gflow::oracle
