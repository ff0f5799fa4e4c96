#pragma once

// Shared instance generators for tests and the acceptance suite.

#include <algorithm>
#include <numeric>
#include <set>

#include "gflow/lossy_graph.hpp"
#include "gflow/lp_instance.hpp"
#include "gflow/rng.hpp"

namespace gflow::testgen {

// d-regular multigraph as a union of d/2 random Hamiltonian cycles; always
// connected, and multi-edges are part of the domain anyway.
inline LossyGraph random_regular(int n, int d, Rng& rng) {
  LossyGraph g;
  g.n = n;
  const int cycles = std::max(1, d / 2);
  std::vector<int> perm(n);
  for (int c = 0; c < cycles; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    for (int i = 0; i < n; ++i) {
      const int a = perm[i], b = perm[(i + 1) % n];
      g.edges.push_back({a, b, 1.0, 1.0});
    }
  }
  return g;
}

// beta-balanced lossy expander: random regular smoothed graph with
// multipliers in [1, 1+beta] and random orientations.
inline LossyGraph balanced_expander(int n, int d, double beta, Rng& rng) {
  LossyGraph g = random_regular(n, d, rng);
  for (auto& e : g.edges) {
    if (rng.uniform() < 0.5) std::swap(e.tail, e.head);
    e.eta = 1.0 + beta * rng.uniform();
  }
  return g;
}

inline LossyGraph complete_graph(int n) {
  LossyGraph g;
  g.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j, 1.0, 1.0});
  return g;
}

inline Mat random_psd(int n, Rng& rng, double spread = 1.0) {
  Mat b(n, n);
  for (auto& x : b.a) x = rng.gaussian();
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += b(i, k) * b(j, k);
      m(i, j) = s / n;
    }
  for (int i = 0; i < n; ++i) m(i, i) += spread * 1e-3;
  return m;
}

inline Vec random_vec(int n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (auto& x : v) x = scale * rng.gaussian();
  return v;
}

inline Vec random_unit(int n, Rng& rng) {
  Vec v = random_vec(n, rng);
  double s = 0.0;
  for (double x : v) s += x * x;
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

// random two-sparse matrix with a mix of row patterns and W_A <= wcap
inline TwoSparseMatrix random_two_sparse(int m, int n, Rng& rng, double wcap = 8.0) {
  TwoSparseMatrix a(n);
  auto val = [&]() {
    const double mag = std::exp(rng.uniform(-std::log(wcap), std::log(wcap)));
    return rng.uniform() < 0.5 ? mag : -mag;
  };
  for (int r = 0; r < m; ++r) {
    std::vector<TsEntry> ent;
    const double roll = rng.uniform();
    const int i = static_cast<int>(rng.index(n));
    if (roll < 0.25 || n == 1) {
      ent.push_back({i, val()});
    } else {
      int j = static_cast<int>(rng.index(n));
      while (j == i) j = static_cast<int>(rng.index(n));
      ent.push_back({i, val()});
      ent.push_back({j, val()});
    }
    a.add_row(ent);
  }
  return a;
}

// feasible box-constrained two-sparse LP: b is chosen from an interior point.
// The first rows chain through all columns so A has full column rank, per the
// oracle's nondegeneracy precondition.
inline LpInstance random_feasible_lp(int m, int n, Rng& rng, double wcap = 4.0) {
  LpInstance inst;
  inst.a = TwoSparseMatrix(n);
  auto val = [&]() {
    const double mag = std::exp(rng.uniform(-std::log(wcap), std::log(wcap)));
    return rng.uniform() < 0.5 ? mag : -mag;
  };
  for (int r = 0; r < std::min(m, n); ++r) {
    std::vector<TsEntry> ent;
    ent.push_back({r, val()});
    if (r + 1 < n && rng.uniform() < 0.7) ent.push_back({r + 1, val()});
    inst.a.add_row(ent);
  }
  const TwoSparseMatrix rest = random_two_sparse(m - std::min(m, n), n, rng, wcap);
  for (int r = 0; r < rest.rows(); ++r)
    inst.a.add_row(std::span<const TsEntry>(rest.row(r), static_cast<size_t>(rest.row_nnz(r))));
  inst.c.resize(m);
  inst.l.resize(m);
  inst.u.resize(m);
  Vec x(m);
  for (int i = 0; i < m; ++i) {
    inst.l[i] = rng.uniform(-2.0, 0.0);
    inst.u[i] = inst.l[i] + rng.uniform(0.5, 3.0);
    inst.c[i] = rng.uniform(-2.0, 2.0);
    x[i] = rng.uniform(inst.l[i] + 0.1 * (inst.u[i] - inst.l[i]),
                       inst.u[i] - 0.1 * (inst.u[i] - inst.l[i]));
  }
  inst.b = inst.a.matvec_t(x);
  return inst;
}

}  // namespace gflow::testgen
