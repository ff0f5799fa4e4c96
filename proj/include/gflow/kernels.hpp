#pragma once

#include <cstddef>

#include "gflow/dense.hpp"

// Dense inner-loop kernels. The parallel versions accumulate every output
// element in a fixed order that does not depend on the thread count, so
// kern:: and kern_serial:: results agree bitwise. Tests rely on that.
namespace gflow {
namespace kern {

double dot(const double* x, const double* y, std::size_t n);
double norm2sq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);

// y = M x
void matvec(const Mat& m, const double* x, double* y);
// G = A^T diag(w) A  (w may be null for unweighted); G is cols x cols
void gram(const Mat& a, const double* w, Mat& g);
// C = A * B
void matmul(const Mat& a, const Mat& b, Mat& c);
// In-place lower Cholesky of symmetric positive definite G; returns false on
// a non-positive pivot. Upper triangle is left untouched.
bool cholesky(Mat& g);
// Solve L L^T x = b given the factor from cholesky().
void cholesky_solve(const Mat& l, const double* b, double* x);

}  // namespace kern

namespace kern_serial {

double dot(const double* x, const double* y, std::size_t n);
double norm2sq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void matvec(const Mat& m, const double* x, double* y);
void gram(const Mat& a, const double* w, Mat& g);
void matmul(const Mat& a, const Mat& b, Mat& c);

}  // namespace kern_serial
}  // namespace gflow
