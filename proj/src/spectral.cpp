#include "gflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gflow/kernels.hpp"
#include "gflow/rng.hpp"

namespace gflow {

EigResult dense_eigs(const Mat& m) {
  const int n = m.rows;
  if (n != m.cols) throw std::invalid_argument("dense_eigs: not square");
  double amax = 0.0, asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      amax = std::max(amax, std::fabs(m(i, j)));
      asym = std::max(asym, std::fabs(m(i, j) - m(j, i)));
    }
  if (asym > 1e-9 * std::max(amax, 1e-300))
    throw std::invalid_argument("dense_eigs: matrix not symmetric");

  Mat a = m;
  Mat v = Mat::identity(n);
  double fro = 0.0;
  for (double x : a.a) fro += x * x;
  fro = std::sqrt(fro);
  const double stop = 1e-12 * std::max(fro, 1e-300);

  int sweep = 0;
  for (; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= stop / n) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        double* rp = a.row(p);
        double* rq = a.row(q);
#pragma omp parallel for schedule(static) if (n > 512)
        for (long long i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = rp[i];
          const double aiq = rq[i];
          rp[i] = aip - s * (aiq + tau * aip);
          rq[i] = aiq + s * (aip - tau * aiq);
          a(static_cast<int>(i), p) = rp[i];
          a(static_cast<int>(i), q) = rq[i];
        }
#pragma omp parallel for schedule(static) if (n > 512)
        for (long long i = 0; i < n; ++i) {
          const double vip = v(static_cast<int>(i), p);
          const double viq = v(static_cast<int>(i), q);
          v(static_cast<int>(i), p) = vip - s * (viq + tau * vip);
          v(static_cast<int>(i), q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }

  EigResult out;
  out.sweeps = sweep;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec diag(n);
  for (int i = 0; i < n; ++i) diag[i] = a(i, i);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.values[j] = diag[src];
    // sign convention: first coordinate of meaningful magnitude positive
    double cmax = 0.0;
    for (int i = 0; i < n; ++i) cmax = std::max(cmax, std::fabs(v(i, src)));
    double sign = 1.0;
    for (int i = 0; i < n; ++i)
      if (std::fabs(v(i, src)) > 1e-12 * cmax) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    for (int i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, src);
  }
  return out;
}

double spectral_norm(const Mat& m) {
  const auto e = dense_eigs(m);
  return std::max(std::fabs(e.values.front()), std::fabs(e.values.back()));
}

PowerIterationResult power_iteration(const std::function<void(const double*, double*)>& apply,
                                     int n, double eps, uint64_t seed, long iter_cap,
                                     int restarts) {
  PowerIterationResult best;
  best.rayleigh = -1.0;
  Rng master(seed);
  const long cap = std::max<long>(iter_cap, 8);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = master.child(r + 1);
    Vec x(n), y(n);
    double nn = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = rng.gaussian();
      nn += x[i] * x[i];
    }
    if (nn == 0.0) x[0] = 1.0, nn = 1.0;
    const double inv = 1.0 / std::sqrt(nn);
    for (auto& xi : x) xi *= inv;

    double ray = 0.0;
    double window_ray = -1.0;
    const int window = 32;
    long it = 0;
    bool cap_hit = true;
    for (; it < cap; ++it) {
      apply(x.data(), y.data());
      ray = kern::dot(x.data(), y.data(), n);
      double ny = std::sqrt(kern::norm2sq(y.data(), n));
      if (ny == 0.0) {  // x in the kernel: any vector maximizes nothing; keep x
        cap_hit = false;
        break;
      }
      for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
      if (it >= 64 && it % window == 0) {
        if (window_ray >= 0.0 && ray - window_ray <= 1e-13 * std::max(1.0, std::fabs(ray))) {
          cap_hit = false;
          break;
        }
        window_ray = ray;
      }
    }
    apply(x.data(), y.data());
    ray = kern::dot(x.data(), y.data(), n);
    if (ray > best.rayleigh) {
      best.v = x;
      best.rayleigh = ray;
      best.iters = it;
      best.cap_hit = cap_hit;
    }
    // a (1 - eps/4) quality vector cannot be beaten by much; keep restarts anyway
    (void)eps;
  }
  return best;
}

LeastEigResult least_eigvec(const LaplacianView& view, const Vec& d, double eps_ad,
                            double lambda2_smooth_lb, uint64_t seed) {
  const int n = view.g->n;
  LeastEigResult out;
  double l2 = lambda2_smooth_lb;
  if (l2 <= 0.0) {
    const auto e = dense_eigs(view.normalized_smooth());
    l2 = n >= 2 ? e.values[1] : 1.0;
  }
  // degree proxy quality c and balance precondition (Lemma-3.5 regime)
  double c = 1.0;
  for (int i = 0; i < n; ++i)
    if (view.d_lossy[i] > 0.0) c = std::max(c, d[i] / view.d_lossy[i]);
  const double beta = view.g->beta();
  if (l2 <= 0.0 || beta > l2 / (40.0 * c)) {
    out.warning = true;
    out.warn_reason = "spectral-gap precondition violated (beta vs lambda2/40c)";
  }

  const double eps = eps_ad / 4.0;
  const long cap = static_cast<long>(
      std::min(2e5, 200.0 * std::log(std::max(2.0, n / std::max(eps, 1e-300))) *
                        std::max(1.0, 16.0 * c / std::max(l2, 1e-12))));

  Vec tmp(n);
  auto apply = [&](const double* x, double* y) {
    view.apply_shifted_normalized(d, eps_ad, x, y);
    for (int i = 0; i < n; ++i) y[i] = 4.0 * x[i] - y[i];
  };
  auto res = power_iteration(apply, n, eps, seed, cap, 3);
  out.v = res.v;
  out.iters = res.iters;
  if (res.cap_hit) {
    out.warning = true;
    if (!out.warn_reason.empty()) out.warn_reason += "; ";
    out.warn_reason += "iteration cap reached, returning best iterate";
  }
  out.lambda = view.shifted_rayleigh(d, eps_ad, out.v);
  // internal invariant: 4I - M must be PSD (lambda_n(M) <= 4)
  if (res.rayleigh < -1e-9 || out.lambda > 4.0 + 1e-9)
    throw std::logic_error("least_eigvec: shifted normalized Laplacian exceeds 4I");
  return out;
}

SpectralCertificate sandwich_check(const LaplacianView& view, const Vec& d, const Vec& v,
                                   double lambda, double eps_ad, double c1, double c2) {
  const int n = view.g->n;
  SpectralCertificate cert;
  cert.lambda = lambda;
  {
    const auto e = dense_eigs(view.normalized_smooth());
    cert.lambda2_smooth = n >= 2 ? e.values[1] : 1.0;
  }
  cert.bound_lo = cert.lambda2_smooth * cert.lambda2_smooth / (12.0 * c1 * c1 * c2 * c2);
  cert.bound_hi = 24.0 * c1 * c2 / cert.lambda2_smooth;

  // M = D^{-1/2} L D^{-1/2} + eps_ad I, K = I - (1-lambda) v v^T,
  // K^{-1/2} = I + (lambda^{-1/2} - 1) v v^T applied analytically.
  Mat m(n, n);
  {
    Vec x(n, 0.0), y(n);
    for (int j = 0; j < n; ++j) {
      x[j] = 1.0;
      view.apply_shifted_normalized(d, eps_ad, x.data(), y.data());
      for (int i = 0; i < n; ++i) m(i, j) = y[i];
      x[j] = 0.0;
    }
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("sandwich_check: lambda must be positive");
  const double alpha = 1.0 / std::sqrt(lambda) - 1.0;
  auto apply_khalf = [&](Mat& t, bool left) {
    // t <- K^{-1/2} t (left) or t <- t K^{-1/2} (right)
    if (left) {
      Vec vt(n, 0.0);
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += v[i] * t(i, j);
        vt[j] = s;
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) += alpha * v[i] * vt[j];
    } else {
      Vec tv(n, 0.0);
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += t(i, j) * v[j];
        tv[i] = s;
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) += alpha * tv[i] * v[j];
    }
  };
  apply_khalf(m, true);
  apply_khalf(m, false);
  // symmetrize fp noise before the oracle
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = s;
      m(j, i) = s;
    }
  const auto pencil = dense_eigs(m);
  cert.c_lo = pencil.values.front();
  cert.c_hi = pencil.values.back();
  const double slack = 1e-8;
  cert.ok = cert.c_lo >= cert.bound_lo * (1.0 - slack) - slack &&
            cert.c_hi <= cert.bound_hi * (1.0 + slack) + slack;
  if (!cert.ok)
    cert.witness = pencil.vector(cert.c_lo < cert.bound_lo ? 0 : n - 1);
  return cert;
}

double uniformity_ratio(const LaplacianView& view, const Vec& d) {
  if (!view.g->connected()) throw std::invalid_argument("uniformity_ratio: graph disconnected");
  const int n = view.g->n;
  Mat m(n, n);
  {
    Vec x(n, 0.0), y(n);
    for (int j = 0; j < n; ++j) {
      x[j] = 1.0;
      view.apply_shifted_normalized(d, 0.0, x.data(), y.data());
      for (int i = 0; i < n; ++i) m(i, j) = y[i];
      x[j] = 0.0;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double s = 0.5 * (m(i, j) + m(j, i));
        m(i, j) = s;
        m(j, i) = s;
      }
  }
  const auto e = dense_eigs(m);
  Vec v = e.vector(0);
  // Fact 4.5: strictly positive after sign normalization
  double mean = 0.0;
  for (double x : v) mean += x;
  if (mean < 0.0)
    for (auto& x : v) x = -x;
  double zmin = 1e300, zmax = -1e300;
  for (int i = 0; i < n; ++i) {
    const double z = v[i] / std::sqrt(d[i]);
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }
  if (!(zmin > 0.0)) throw std::runtime_error("uniformity_ratio: v_min not strictly positive");
  return zmax / zmin;
}

double sweep_cut_volume(const LaplacianView& view, const Vec& z, double zeta, SweepDir dir) {
  double vol = 0.0;
  for (int i = 0; i < view.g->n; ++i) {
    const bool in = dir == SweepDir::Above ? z[i] >= zeta : z[i] <= zeta;
    if (in) vol += view.d_smooth[i];
  }
  return vol;
}

ConductanceResult conductance_exact(const LossyGraph& g, uint64_t seed) {
  const int n = g.n;
  if (n == 0 || g.m() == 0) throw std::invalid_argument("conductance: empty graph");
  Vec vol(n, 0.0);
  double total = 0.0;
  for (const auto& e : g.edges) {
    vol[e.tail] += e.weight;
    vol[e.head] += e.weight;
    total += 2.0 * e.weight;
  }
  ConductanceResult out;
  out.phi = 1e300;
  auto eval = [&](uint64_t mask) {
    double vs = 0.0, cut = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) vs += vol[i];
    if (vs == 0.0 || vs == total) return;
    for (const auto& e : g.edges) {
      const bool a = mask >> e.tail & 1, b = mask >> e.head & 1;
      if (a != b) cut += e.weight;
    }
    const double phi = cut / std::min(vs, total - vs);
    if (phi < out.phi) {
      out.phi = phi;
      out.cut.clear();
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) out.cut.push_back(i);
    }
  };
  if (n <= 16) {
    // vertex n-1 pinned to the complement; halves the enumeration
    const uint64_t lim = 1ull << (n - 1);
    for (uint64_t mask = 1; mask < lim; ++mask) eval(mask);
    out.exact = true;
  } else {
    Rng r2(seed + 17);
    for (int i = 0; i < n; ++i) eval(1ull << i);
    for (int t = 0; t < 4096; ++t) {
      uint64_t mask = 0;
      for (int i = 0; i < n && i < 63; ++i)
        if (r2.uniform() < 0.5) mask |= 1ull << i;
      eval(mask);
    }
    out.exact = false;
  }
  if (out.phi == 1e300) out.phi = 0.0;
  return out;
}

AlignmentBounds alignment_bounds(const Mat& m, const Vec& v) {
  const auto e = dense_eigs(m);
  const int n = m.rows;
  AlignmentBounds out;
  out.lambda1 = e.values[0];
  const double l2 = n >= 2 ? e.values[1] : e.values[0];
  const double ln = e.values[n - 1];
  if (!(l2 > 0.0)) throw std::invalid_argument("alignment_bounds: lambda_2 must be positive");
  if (l2 - out.lambda1 <= 1e-12 * std::max(1.0, std::fabs(ln))) {
    out.degenerate = true;
    return out;
  }
  double dotv = 0.0, ray = 0.0;
  {
    const Vec v1 = e.vector(0);
    for (int i = 0; i < n; ++i) dotv += v1[i] * v[i];
    Vec y(n);
    kern::matvec(m, v.data(), y.data());
    ray = kern::dot(v.data(), y.data(), n);
  }
  out.rayleigh = ray;
  out.misalignment = std::max(0.0, 1.0 - dotv * dotv);
  out.forward_bound = ray / l2;
  out.forward_ok = out.misalignment <= out.forward_bound + 1e-8;
  out.backward_c = out.lambda1 > 0.0 ? out.misalignment * ln / out.lambda1 : 0.0;
  out.backward_ok = out.lambda1 > 0.0
                        ? ray <= (1.0 + out.backward_c) * out.lambda1 * (1.0 + 1e-8) + 1e-12
                        : true;
  return out;
}

}  // namespace gflow
