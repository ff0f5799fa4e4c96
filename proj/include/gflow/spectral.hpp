#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gflow/dense.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

struct EigResult {
  Vec values;   // ascending
  Mat vectors;  // column j pairs with values[j]
  int sweeps = 0;
  Vec vector(int j) const {
    Vec v(vectors.rows);
    for (int i = 0; i < vectors.rows; ++i) v[i] = vectors(i, j);
    return v;
  }
};

// Cyclic Jacobi eigensolver; the deterministic oracle behind the spectral
// tests. Rejects matrices with ||M - M^T||_inf > 1e-9 ||M||_inf.
EigResult dense_eigs(const Mat& m);

// ||M||_2 via dense_eigs of the symmetric part (tests only use symmetric M)
double spectral_norm(const Mat& m);

struct PowerIterationResult {
  Vec v;
  double rayleigh = 0.0;  // v^T M v of the returned vector
  long iters = 0;
  bool cap_hit = false;
};

// Random-start power iteration maximizing the Rayleigh quotient of a PSD
// operator; best of `restarts` runs.
PowerIterationResult power_iteration(const std::function<void(const double*, double*)>& apply,
                                     int n, double eps, uint64_t seed, long iter_cap,
                                     int restarts = 3);

struct LeastEigResult {
  Vec v;
  double lambda = 0.0;  // Rayleigh quotient of v on the shifted matrix
  long iters = 0;
  bool warning = false;
  std::string warn_reason;
};

// Approximate least eigenvector of D^{-1/2} L_G D^{-1/2} + eps_ad I via
// power iteration on 4I - (.), run with eps = eps_ad / 4.
// lambda2_smooth_lb: caller's lower bound on lambda_2(N_smoothed); pass <= 0
// to have it computed by the dense oracle.
LeastEigResult least_eigvec(const LaplacianView& view, const Vec& d, double eps_ad,
                            double lambda2_smooth_lb, uint64_t seed);

struct SpectralCertificate {
  double lambda = 0.0;     // Rayleigh quotient of v
  double c_lo = 0.0;       // measured extreme pencil eigenvalues
  double c_hi = 0.0;
  double bound_lo = 0.0;   // lambda_2(N_bar)^2 / (12 c1^2 c2^2)
  double bound_hi = 0.0;   // 24 c1 c2 / lambda_2(N_bar)
  double lambda2_smooth = 0.0;
  bool ok = false;
  Vec witness;  // pencil eigenvector when a bound is violated
};

// Certifies  bound_lo (I - (1-lambda)vv^T) <= D^{-1/2}L D^{-1/2} + eps_ad I
//            <= bound_hi (I - (1-lambda)vv^T)
// by computing extreme eigenvalues of the pencil with the dense oracle.
SpectralCertificate sandwich_check(const LaplacianView& view, const Vec& d, const Vec& v,
                                   double lambda, double eps_ad, double c1, double c2);

// max_i(v_min/sqrt(d)) / min_i(v_min/sqrt(d)); throws on disconnected input.
double uniformity_ratio(const LaplacianView& view, const Vec& d);

enum class SweepDir { Above, Below };
// Smoothed-degree volume of S_{>=zeta}(z) or S_{<=zeta}(z).
double sweep_cut_volume(const LaplacianView& view, const Vec& z, double zeta, SweepDir dir);

struct ConductanceResult {
  double phi = 0.0;
  bool exact = false;
  std::vector<int> cut;  // the achieving side (exact mode)
};
// Exact conductance of the smoothed graph by subset enumeration for
// |V| <= 16; sampled-subsets upper bound beyond. Weights taken from edges.
ConductanceResult conductance_exact(const LossyGraph& g, uint64_t seed = 0);

struct AlignmentBounds {
  double misalignment = 0.0;   // 1 - (v^T v1)^2
  double forward_bound = 0.0;  // v^T M v / lambda_2
  double backward_c = 0.0;     // misalignment * lambda_n / lambda_1
  double rayleigh = 0.0;
  double lambda1 = 0.0;
  bool forward_ok = false;   // misalignment <= forward_bound
  bool backward_ok = false;  // rayleigh <= (1 + backward_c) lambda_1
  bool degenerate = false;   // lambda_2 ~ lambda_1, alignment ill-defined
};
AlignmentBounds alignment_bounds(const Mat& m, const Vec& v);

}  // namespace gflow
