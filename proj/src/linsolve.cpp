#include "gflow/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gflow/kernels.hpp"
#include "gflow/spectral.hpp"

namespace gflow {

void DenseSpdSolver::factor(const Mat& g) {
  chol = g;
  ok = kern::cholesky(chol);
  if (!ok) {
    // tiny relative jitter before giving up; callers treat !ok as rank defect
    chol = g;
    double tr = 0.0;
    for (int i = 0; i < g.rows; ++i) tr += g(i, i);
    for (int i = 0; i < g.rows; ++i) chol(i, i) += 1e-12 * std::max(tr, 1.0) / std::max(g.rows, 1);
    ok = kern::cholesky(chol);
  }
}

Vec DenseSpdSolver::solve(const Vec& b) const {
  Vec x(b.size());
  kern::cholesky_solve(chol, b.data(), x.data());
  return x;
}

LeverageResult leverage_scores(const TwoSparseMatrix& a, const Vec& w) {
  const int n = a.cols(), m = a.rows();
  LeverageResult out;
  Mat g = a.gram(w);
  Mat chol = g;
  if (!kern::cholesky(chol)) {
    // retry with a relative jitter: weighted grams can underflow to numerical
    // singularity late on the central path even when A has full column rank
    chol = g;
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += g(i, i);
    for (int i = 0; i < n; ++i) chol(i, i) += 1e-12 * std::max(tr, 1e-300) / std::max(n, 1);
    if (!kern::cholesky(chol)) {
      out.rank_deficient = true;
      const auto e = dense_eigs(g);
      out.null_witness = e.vector(0);
      return out;
    }
  }
  // sigma_i = w_i a_i^T G^{-1} a_i via n solves for the inverse columns
  Mat inv(n, n);
  Vec ei(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    ei[j] = 1.0;
    kern::cholesky_solve(chol, ei.data(), col.data());
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    ei[j] = 0.0;
  }
  out.sigma.assign(m, 0.0);
  for (int r = 0; r < m; ++r) {
    const TsEntry* e = a.row(r);
    const double wr = w.empty() ? 1.0 : w[r];
    double s = 0.0;
    for (int p = 0; p < a.row_nnz(r); ++p)
      for (int q = 0; q < a.row_nnz(r); ++q)
        s += e[p].val * inv(e[p].col, e[q].col) * e[q].val;
    out.sigma[r] = wr * s;
  }
  return out;
}

LewisResult lewis_weights(const TwoSparseMatrix& a, const Vec& phi2, const Vec* warm_start,
                          int max_iters, double tol) {
  const int m = a.rows(), n = a.cols();
  if (static_cast<int>(phi2.size()) != m) throw std::invalid_argument("lewis_weights: phi2 length");
  const double p = 1.0 - 1.0 / (4.0 * std::log(4.0 * static_cast<double>(m) / std::max(1, n)));
  const double reg = static_cast<double>(n) / m;
  Vec scale(m);  // rows of Atil = diag(phi2^{-1/2}) A enter through the weights
  for (int i = 0; i < m; ++i) {
    if (!(phi2[i] > 0.0)) throw std::invalid_argument("lewis_weights: phi'' must be positive");
    scale[i] = 1.0 / phi2[i];
  }
  LewisResult out;
  out.tau.assign(m, 1.0);
  if (warm_start && static_cast<int>(warm_start->size()) == m) out.tau = *warm_start;
  Vec wrow(m);
  for (out.iters = 1; out.iters <= max_iters; ++out.iters) {
    // sigma(W^{1/2-1/p} Atil)_i = w_i^{1-2/p} * atil_i^T (Atil^T W^{1-2/p} Atil)^{-1} atil_i
    for (int i = 0; i < m; ++i) wrow[i] = std::pow(out.tau[i], 1.0 - 2.0 / p) * scale[i];
    const auto lev = leverage_scores(a, wrow);
    if (lev.rank_deficient)
      throw std::invalid_argument("lewis_weights: rank-deficient weighted matrix");
    double delta = 0.0;
    for (int i = 0; i < m; ++i) {
      const double next = lev.sigma[i] + reg;
      delta = std::max(delta, std::fabs(next - out.tau[i]) / std::max(next, 1e-300));
      out.tau[i] = next;
    }
    out.residual = delta;
    if (delta <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

bool sdd_check(const Mat& m) {
  double scale = 0.0;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) scale = std::max(scale, std::fabs(m(i, j)));
  for (int i = 0; i < m.rows; ++i) {
    double off = 0.0;
    for (int j = 0; j < m.cols; ++j)
      if (j != i) off += std::fabs(m(i, j));
    if (m(i, i) < off - 1e-9 * std::max(scale, 1e-300)) return false;
  }
  return true;
}

SddSolveResult sdd_solve(const std::function<void(const double*, double*)>& apply,
                         const Vec& diag, const Vec& b, double eps, int iter_cap) {
  const int n = static_cast<int>(b.size());
  SddSolveResult out;
  out.x.assign(n, 0.0);
  Vec r = b, z(n), pvec(n), ap(n);
  const double nb = std::sqrt(kern::norm2sq(b.data(), n));
  if (nb == 0.0) {
    out.converged = true;
    return out;
  }
  auto precond = [&](const Vec& rr, Vec& zz) {
    for (int i = 0; i < n; ++i) zz[i] = diag[i] > 0.0 ? rr[i] / diag[i] : rr[i];
  };
  precond(r, z);
  pvec = z;
  double rz = kern::dot(r.data(), z.data(), n);
  const int cap = iter_cap > 0 ? iter_cap : 20 * n + 200;
  for (int it = 0; it < cap; ++it) {
    apply(pvec.data(), ap.data());
    const double pap = kern::dot(pvec.data(), ap.data(), n);
    if (!(pap > 0.0)) break;  // hit the (near-)null space component
    const double alpha = rz / pap;
    kern::axpy(alpha, pvec.data(), out.x.data(), n);
    kern::axpy(-alpha, ap.data(), r.data(), n);
    out.iters = it + 1;
    const double nr = std::sqrt(kern::norm2sq(r.data(), n));
    out.rel_residual = nr / nb;
    if (out.rel_residual <= eps) {
      out.converged = true;
      return out;
    }
    precond(r, z);
    const double rz2 = kern::dot(r.data(), z.data(), n);
    const double beta = rz2 / rz;
    rz = rz2;
    for (int i = 0; i < n; ++i) pvec[i] = z[i] + beta * pvec[i];
  }
  return out;
}

MmatrixScaleResult mmatrixscale_impl(const TwoSparseMatrix& a, const Vec& w) {
  const int n = a.cols();
  // reject rows producing positive off-diagonal Gram entries
  for (int r = 0; r < a.rows(); ++r) {
    const TsEntry* e = a.row(r);
    if (a.row_nnz(r) == 2 && e[0].val * e[1].val > 0.0)
      throw std::invalid_argument("mmatrix_scale: positive off-diagonal; reduce the rows first");
  }
  Mat m = a.gram(w);
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += m(i, i);
  MmatrixScaleResult out;
  Vec ones(n, 1.0), diag(n);
  for (int i = 0; i < n; ++i) diag[i] = m(i, i);
  double mu = 1e-12 * std::max(tr, 1e-300) / std::max(n, 1);
  for (out.attempts = 1; out.attempts <= 4; ++out.attempts) {
    auto apply = [&](const double* x, double* y) {
      kern::matvec(m, x, y);
      for (int i = 0; i < n; ++i) y[i] += mu * x[i];
    };
    Vec dshift = diag;
    for (auto& v : dshift) v += mu;
    auto res = sdd_solve(apply, dshift, ones, 1e-13, 40 * n + 400);
    bool positive = res.converged || res.rel_residual < 1e-10;
    for (double z : res.x)
      if (!(z > 0.0)) positive = false;
    if (positive) {
      Mat dmd = m;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dmd(i, j) *= res.x[i] * res.x[j];
      if (sdd_check(dmd)) {
        out.d = res.x;
        out.sdd = true;
        return out;
      }
    }
    mu *= 1e-2;  // z approaches M^{-1} 1 and M z = 1 - mu z turns nonnegative
  }
  // dense fallback: z = (M + mu I)^{-1} 1 by factorization
  Mat g = a.gram(w);
  for (int i = 0; i < n; ++i) g(i, i) += mu * 1e6;
  DenseSpdSolver ds;
  ds.factor(g);
  if (ds.ok) {
    out.d = ds.solve(ones);
    Mat dmd = m;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dmd(i, j) *= out.d[i] * out.d[j];
    out.sdd = sdd_check(dmd);
  }
  return out;
}

MmatrixScaleResult mmatrix_scale(const TwoSparseMatrix& a, const Vec& w) {
  return mmatrixscale_impl(a, w);
}

InverseMaintenance::InverseMaintenance(const TwoSparseMatrix& a, Vec v, Vec sigma_bar,
                                       Config cfg)
    : a_(a), v_(std::move(v)), sigma_bar_(std::move(sigma_bar)), cfg_(cfg), rng_(cfg.seed) {
  if (static_cast<int>(v_.size()) != a_.rows() ||
      static_cast<int>(sigma_bar_.size()) != a_.rows())
    throw std::invalid_argument("inverse maintenance: length mismatch");
  s_.assign(a_.rows(), 0.0);
  const double logn = std::log(std::max(2, a_.cols()));
  for (int i = 0; i < a_.rows(); ++i) {
    const double p = std::min(1.0, cfg_.theta * sigma_bar_[i] * logn);
    if (p > 0.0 && rng_.uniform() < p) s_[i] = 1.0 / p;
  }
}

void InverseMaintenance::scale(int i, double v_new, double sigma_bar_new) {
  v_[i] = v_new;
  sigma_bar_[i] = sigma_bar_new;
  const double logn = std::log(std::max(2, a_.cols()));
  const double p = std::min(1.0, cfg_.theta * sigma_bar_new * logn);
  s_[i] = (p > 0.0 && rng_.uniform() < p) ? 1.0 / p : 0.0;
  factor_fresh_ = false;
}

Mat InverseMaintenance::sampled_gram() const {
  Vec w(a_.rows());
  for (int i = 0; i < a_.rows(); ++i) w[i] = v_[i] * s_[i];
  return a_.gram(w);
}

Mat InverseMaintenance::true_gram() const { return a_.gram(v_); }

void InverseMaintenance::ensure_factor() {
  if (factor_fresh_) return;
  precond_.factor(sampled_gram());
  factor_fresh_ = true;
}

InverseMaintenance::SolveResult InverseMaintenance::solve(const Vec& v_bar, const Vec& b,
                                                          double eps, int sweep_cap) {
  ensure_factor();
  const int n = a_.cols();
  SolveResult out;
  out.x.assign(n, 0.0);
  if (!precond_.ok) return out;
  const double nb = std::sqrt(kern::norm2sq(b.data(), n));
  if (nb == 0.0) {
    out.converged = true;
    return out;
  }
  // fixed damping for a 0.1-approximate preconditioner against a 1/2-approx
  // target operator: spectrum of P^{-1} M inside [e^{-0.6}, e^{0.6}]
  const double omega = 2.0 / (std::exp(-0.6) + std::exp(0.6));
  Vec r = b, y(a_.rows()), t(n);
  for (int sweep = 0; sweep < sweep_cap; ++sweep) {
    Vec dx = precond_.solve(r);
    for (int i = 0; i < n; ++i) out.x[i] += omega * dx[i];
    // r = b - A^T Vbar A x
    Vec ax = a_.matvec(out.x);
    for (int i = 0; i < a_.rows(); ++i) ax[i] *= v_bar[i];
    Vec atvax = a_.matvec_t(ax);
    for (int i = 0; i < n; ++i) r[i] = b[i] - atvax[i];
    out.sweeps = sweep + 1;
    out.rel_residual = std::sqrt(kern::norm2sq(r.data(), n)) / nb;
    if (out.rel_residual <= eps) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace gflow
