#include "gflow/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gflow {

// Block size for dot/norm reductions. Block partials are summed in block
// order, so the result is independent of how blocks are scheduled.
static constexpr std::size_t kBlock = 2048;

namespace kern {

double dot(const double* x, const double* y, std::size_t n) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  if (nb <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm2sq(const double* x, std::size_t n) { return dot(x, x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += a * x[i];
}

void matvec(const Mat& m, const double* x, double* y) {
#pragma omp parallel for schedule(static) if (m.rows * m.cols > 65536)
  for (long long i = 0; i < m.rows; ++i) {
    const double* r = m.row(static_cast<int>(i));
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

void gram(const Mat& a, const double* w, Mat& g) {
  const int n = a.cols;
  g = Mat(n, n);
#pragma omp parallel for schedule(static) if (static_cast<long long>(n) * n * a.rows > 262144)
  for (long long i = 0; i < n; ++i) {
    for (int j = static_cast<int>(i); j < n; ++j) {
      double s = 0.0;
      if (w) {
        for (int k = 0; k < a.rows; ++k) s += a(k, static_cast<int>(i)) * w[k] * a(k, j);
      } else {
        for (int k = 0; k < a.rows; ++k) s += a(k, static_cast<int>(i)) * a(k, j);
      }
      g(static_cast<int>(i), j) = s;
      g(j, static_cast<int>(i)) = s;
    }
  }
}

void matmul(const Mat& a, const Mat& b, Mat& c) {
  c = Mat(a.rows, b.cols);
#pragma omp parallel for schedule(static) if (static_cast<long long>(a.rows) * a.cols * b.cols > 262144)
  for (long long i = 0; i < a.rows; ++i) {
    const double* ra = a.row(static_cast<int>(i));
    double* rc = c.row(static_cast<int>(i));
    for (int k = 0; k < a.cols; ++k) {
      const double v = ra[k];
      if (v == 0.0) continue;
      const double* rb = b.row(k);
      for (int j = 0; j < b.cols; ++j) rc[j] += v * rb[j];
    }
  }
}

bool cholesky(Mat& g) {
  const int n = g.rows;
  for (int j = 0; j < n; ++j) {
    double d = g(j, j);
    const double* rj = g.row(j);
    for (int k = 0; k < j; ++k) d -= rj[k] * rj[k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    g(j, j) = ljj;
#pragma omp parallel for schedule(static) if (n - j > 128)
    for (long long i = j + 1; i < n; ++i) {
      const double* ri = g.row(static_cast<int>(i));
      double s = g(static_cast<int>(i), j);
      for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
      g(static_cast<int>(i), j) = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const Mat& l, const double* b, double* x) {
  const int n = l.rows;
  // forward
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    const double* ri = l.row(i);
    for (int k = 0; k < i; ++k) s -= ri[k] * x[k];
    x[i] = s / ri[i];
  }
  // backward
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
}

}  // namespace kern

namespace kern_serial {

double dot(const double* x, const double* y, std::size_t n) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    partial[b] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm2sq(const double* x, std::size_t n) { return dot(x, x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec(const Mat& m, const double* x, double* y) {
  for (int i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

void gram(const Mat& a, const double* w, Mat& g) {
  const int n = a.cols;
  g = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      if (w) {
        for (int k = 0; k < a.rows; ++k) s += a(k, i) * w[k] * a(k, j);
      } else {
        for (int k = 0; k < a.rows; ++k) s += a(k, i) * a(k, j);
      }
      g(i, j) = s;
      g(j, i) = s;
    }
  }
}

void matmul(const Mat& a, const Mat& b, Mat& c) {
  c = Mat(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ra = a.row(i);
    double* rc = c.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double v = ra[k];
      if (v == 0.0) continue;
      const double* rb = b.row(k);
      for (int j = 0; j < b.cols; ++j) rc[j] += v * rb[j];
    }
  }
}

}  // namespace kern_serial
}  // namespace gflow
