#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gflow/lossy_graph.hpp"

namespace gflow {

// min c^T x  s.t.  A^T x = b,  l <= x <= u   with two-sparse A (m x n).
// Variables live on rows of A, matching the flow formulations.
struct LpInstance {
  TwoSparseMatrix a;
  Vec b;  // length n
  Vec c, l, u;  // length m

  int n_rows() const { return a.rows(); }
  int n_cols() const { return a.cols(); }

  void validate() const {
    const int m = a.rows();
    if (static_cast<int>(b.size()) != a.cols()) throw std::invalid_argument("lp: b length");
    if (static_cast<int>(c.size()) != m || static_cast<int>(l.size()) != m ||
        static_cast<int>(u.size()) != m)
      throw std::invalid_argument("lp: c/l/u length");
    for (int i = 0; i < m; ++i)
      if (!(l[i] < u[i])) throw std::invalid_argument("lp: requires l < u entrywise");
  }

  double magnitude() const {
    double w = a.magnitude_bound();
    for (double x : c) w = std::max(w, std::fabs(x));
    for (double x : b) w = std::max(w, std::fabs(x));
    for (double x : u) w = std::max(w, std::fabs(x));
    for (double x : l) w = std::max(w, std::fabs(x));
    double gmin = 1e300, gmax = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
      gmin = std::min(gmin, u[i] - l[i]);
      gmax = std::max(gmax, u[i] - l[i]);
    }
    if (a.rows() > 0) w = std::max(w, gmax / gmin);
    if (!std::isfinite(w)) throw std::invalid_argument("lp: magnitude bound not finite");
    return w;
  }
};

}  // namespace gflow
