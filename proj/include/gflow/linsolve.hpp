#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "gflow/lossy_graph.hpp"
#include "gflow/rng.hpp"

namespace gflow {

// Dense symmetric positive definite solve helper (cached Cholesky).
struct DenseSpdSolver {
  Mat chol;
  bool ok = false;
  void factor(const Mat& g);
  Vec solve(const Vec& b) const;
};

// sigma_i = w_i a_i^T (A^T W A)^{-1} a_i for two-sparse A; dense at desk
// scale. Throws with a null-space witness message on rank deficiency.
struct LeverageResult {
  Vec sigma;
  bool rank_deficient = false;
  Vec null_witness;
};
LeverageResult leverage_scores(const TwoSparseMatrix& a, const Vec& w);

// Regularized l_p Lewis weights: fixed point of
//   w = sigma(W^{1/2 - 1/p} Atil) + n/m,  p = 1 - 1/(4 log(4m/n)),
// for Atil = diag(phi''(x)^{-1/2}) A.
struct LewisResult {
  Vec tau;
  int iters = 0;
  bool converged = false;
  double residual = 0.0;
};
LewisResult lewis_weights(const TwoSparseMatrix& a, const Vec& phi2,
                          const Vec* warm_start = nullptr, int max_iters = 500,
                          double tol = 1e-8);

// Positive diagonal D with D M D symmetric diagonally dominant, for
// M = A^T W A in lossy-incidence form (off-diagonals <= 0). Realized by
// solving (M + mu I) z = 1 and taking D = diag(z); certified rowwise.
struct MmatrixScaleResult {
  Vec d;
  bool sdd = false;
  int attempts = 0;
};
MmatrixScaleResult mmatrix_scale(const TwoSparseMatrix& a, const Vec& w);

// exact rowwise SDD predicate with 1e-9 relative slack
bool sdd_check(const Mat& m);

// Preconditioned (Jacobi) conjugate gradient for SDD operators.
struct SddSolveResult {
  Vec x;
  double rel_residual = 0.0;
  int iters = 0;
  bool converged = false;
};
SddSolveResult sdd_solve(const std::function<void(const double*, double*)>& apply,
                         const Vec& diag, const Vec& b, double eps, int iter_cap = 0);

// Sampled-preconditioner inverse maintenance for A^T V A systems.
class InverseMaintenance {
 public:
  struct Config {
    double theta = 40.0;  // p_i = min(1, theta * sigma_bar_i * log n)
    uint64_t seed = 1;
  };

  InverseMaintenance(const TwoSparseMatrix& a, Vec v, Vec sigma_bar, Config cfg);

  void scale(int i, double v_new, double sigma_bar_new);

  struct SolveResult {
    Vec x;
    int sweeps = 0;
    double rel_residual = 0.0;
    bool converged = false;
  };
  // Richardson with the sampled-Gram preconditioner; H ~ A^T Vbar A.
  // Requires A^T V A ~_{1/2} A^T Vbar A.
  SolveResult solve(const Vec& v_bar, const Vec& b, double eps, int sweep_cap = 40);

  // dense sampled and true Gram matrices, for the spectral check
  Mat sampled_gram() const;
  Mat true_gram() const;
  const Vec& sample_diag() const { return s_; }

 private:
  void ensure_factor();

  const TwoSparseMatrix& a_;
  Vec v_, sigma_bar_, s_;  // s_: sampled diagonal entries (0 or 1/p_i)
  Config cfg_;
  Rng rng_;
  DenseSpdSolver precond_;
  bool factor_fresh_ = false;
};

}  // namespace gflow
