#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gflow/kernels.hpp"
#include "gflow/linsolve.hpp"
#include "gflow/oracles.hpp"
#include "gflow/spectral.hpp"
#include "support.hpp"

using namespace gflow;

TEST_CASE("leverage scores: identity, orthonormal-ish, trace identity") {
  TwoSparseMatrix id3(3);
  for (int i = 0; i < 3; ++i) {
    TsEntry e[1] = {{i, 1.0}};
    id3.add_row(e);
  }
  const auto lev = leverage_scores(id3, Vec(3, 1.0));
  for (double s : lev.sigma) CHECK(s == doctest::Approx(1.0));

  Rng rng(3);
  const auto a = testgen::random_two_sparse(30, 6, rng);
  Vec w(30);
  for (auto& x : w) x = std::exp(rng.uniform(-1.0, 1.0));
  const auto l2 = leverage_scores(a, w);
  REQUIRE_FALSE(l2.rank_deficient);
  double sum = 0.0;
  for (double s : l2.sigma) {
    CHECK(s >= -1e-10);
    CHECK(s <= 1.0 + 1e-10);
    sum += s;
  }
  CHECK(sum == doctest::Approx(6.0).epsilon(1e-8));
  // against the dense oracle on W^{1/2} A
  Mat dense = a.dense();
  for (int r = 0; r < 30; ++r)
    for (int j = 0; j < 6; ++j) dense(r, j) *= std::sqrt(w[r]);
  const Vec ref = oracle::dense_leverage_scores(dense);
  for (int r = 0; r < 30; ++r) CHECK(l2.sigma[r] == doctest::Approx(ref[r]).epsilon(1e-7));
}

TEST_CASE("leverage scores report rank deficiency with a witness") {
  TwoSparseMatrix a(3);  // never touches column 2
  TsEntry e[2] = {{0, 1.0}, {1, -1.0}};
  a.add_row(e);
  a.add_row(e);
  const auto lev = leverage_scores(a, Vec(2, 1.0));
  CHECK(lev.rank_deficient);
  REQUIRE_FALSE(lev.null_witness.empty());
  // witness lies in the null space of the gram
  const Mat g = a.gram(Vec(2, 1.0));
  Vec y(3);
  kern::matvec(g, lev.null_witness.data(), y.data());
  for (double v : y) CHECK(std::fabs(v) < 1e-8);
}

TEST_CASE("lewis weights: square invertible case gives tau = 2") {
  TwoSparseMatrix id4(4);
  for (int i = 0; i < 4; ++i) {
    TsEntry e[1] = {{i, 2.0}};
    id4.add_row(e);
  }
  const auto r = lewis_weights(id4, Vec(4, 1.0));
  CHECK(r.converged);
  for (double t : r.tau) CHECK(t == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("lewis weights: fixed point, bounds, long-run agreement") {
  Rng rng(7);
  for (int t = 0; t < 6; ++t) {
    const int m = 24, n = 5;
    const auto a = testgen::random_two_sparse(m, n, rng);
    Vec phi2(m);
    for (auto& x : phi2) x = std::exp(rng.uniform(-1.0, 1.0));
    const auto r = lewis_weights(a, phi2);
    REQUIRE(r.converged);
    CHECK(r.residual <= 1e-8);
    double l1 = 0.0;
    for (double x : r.tau) {
      CHECK(x >= static_cast<double>(n) / m - 1e-12);
      l1 += x;
    }
    CHECK(l1 <= 2.0 * n + 1e-9);
    // one more iteration moves it by <= 1e-8 relative, and a long run agrees
    const auto longer = lewis_weights(a, phi2, nullptr, 2000, 1e-14);
    for (int i = 0; i < m; ++i)
      CHECK(r.tau[i] == doctest::Approx(longer.tau[i]).epsilon(1e-6));
  }
}

TEST_CASE("sdd predicate is exact and rowwise") {
  Mat good(2, 2);
  good(0, 0) = 2.0;
  good(0, 1) = good(1, 0) = -2.0;
  good(1, 1) = 2.0;
  CHECK(sdd_check(good));
  good(0, 1) = good(1, 0) = -2.1;
  CHECK_FALSE(sdd_check(good));
}

TEST_CASE("mmatrix scaling on lossy incidence grams") {
  Rng rng(11);
  {  // graph Laplacian: identity scaling works, ours must also pass
    LossyGraph g = testgen::random_regular(12, 4, rng);
    TwoSparseMatrix a(12);
    for (const auto& e : g.edges) {
      TsEntry ent[2] = {{e.head, 1.0}, {e.tail, -e.eta}};
      a.add_row(ent);
    }
    const auto r = mmatrix_scale(a, Vec(g.m(), 1.0));
    CHECK(r.sdd);
  }
  {  // lossy 3-cycle
    TwoSparseMatrix a(3);
    for (int i = 0; i < 3; ++i) {
      TsEntry ent[2] = {{(i + 1) % 3, 1.0}, {i, -1.7}};
      a.add_row(ent);
    }
    const auto r = mmatrix_scale(a, Vec(3, 1.0));
    REQUIRE(r.sdd);
    Mat dmd = a.gram(Vec(3, 1.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dmd(i, j) *= r.d[i] * r.d[j];
    CHECK(sdd_check(dmd));
  }
  {  // positive off-diagonal rejected
    TwoSparseMatrix a(2);
    TsEntry ent[2] = {{0, 1.0}, {1, 2.0}};
    a.add_row(ent);
    CHECK_THROWS(mmatrix_scale(a, Vec(1, 1.0)));
  }
  for (int t = 0; t < 10; ++t) {
    LossyGraph g = testgen::balanced_expander(20, 4, 0.3, rng);
    for (auto& e : g.edges) e.eta = 1.0 + 2.0 * rng.uniform();
    TwoSparseMatrix a(20);
    for (const auto& e : g.edges) {
      TsEntry ent[2] = {{e.head, 1.0}, {e.tail, -e.eta}};
      a.add_row(ent);
    }
    Vec w(g.m());
    for (auto& x : w) x = std::exp(rng.uniform(-1.0, 1.0));
    const auto r = mmatrix_scale(a, w);
    CHECK(r.sdd);
  }
}

TEST_CASE("sdd_solve: identity, Laplacian plus regularizer, near-null rhs") {
  Rng rng(13);
  {
    Vec diag(5, 1.0), b = testgen::random_vec(5, rng);
    auto apply = [](const double* x, double* y) {
      for (int i = 0; i < 5; ++i) y[i] = x[i];
    };
    const auto r = sdd_solve(apply, diag, b, 1e-12);
    REQUIRE(r.converged);
    for (int i = 0; i < 5; ++i) CHECK(r.x[i] == doctest::Approx(b[i]));
  }
  LossyGraph g = testgen::random_regular(24, 4, rng);
  const auto view = build_incidence(g);
  const Mat l = view.laplacian();
  const double mu = 1e-6;
  auto apply = [&](const double* x, double* y) {
    kern::matvec(l, x, y);
    for (int i = 0; i < 24; ++i) y[i] += mu * x[i];
  };
  Vec diag(24);
  for (int i = 0; i < 24; ++i) diag[i] = l(i, i) + mu;
  Vec b = testgen::random_vec(24, rng);
  const auto r = sdd_solve(apply, diag, b, 1e-10);
  CHECK(r.converged);
  CHECK(r.rel_residual <= 1e-10);
  // rhs with a large near-null (all-ones) component: residual still reported
  Vec ones_b(24, 1.0);
  const auto r2 = sdd_solve(apply, diag, ones_b, 1e-10, 2000);
  CHECK(r2.rel_residual <= 1e-6);
}

TEST_CASE("inverse maintenance: sampled gram approximation and Richardson") {
  Rng rng(17);
  int good = 0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    const int n = 12, m = 140;
    const auto a = testgen::random_two_sparse(m, n, rng);
    Vec v(m);
    for (auto& x : v) x = std::exp(rng.uniform(-0.5, 0.5));
    const auto lev = leverage_scores(a, v);
    REQUIRE_FALSE(lev.rank_deficient);
    Vec sbar = lev.sigma;  // exact scores as overestimates
    InverseMaintenance im(a, v, sbar, {40.0, 900 + static_cast<uint64_t>(t)});
    // spectral check of the pencil
    const Mat p = im.sampled_gram();
    const Mat tr = im.true_gram();
    const auto et = dense_eigs(tr);
    Mat isq(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += et.vectors(i, k) / std::sqrt(et.values[k]) * et.vectors(j, k);
        isq(i, j) = s;
      }
    Mat t1, t2;
    kern::matmul(isq, p, t1);
    kern::matmul(t1, isq, t2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double s = 0.5 * (t2(i, j) + t2(j, i));
        t2(i, j) = t2(j, i) = s;
      }
    const auto pe = dense_eigs(t2);
    const bool approx_01 =
        pe.values.front() >= std::exp(-0.1) - 1e-9 && pe.values.back() <= std::exp(0.1) + 1e-9;
    if (approx_01) ++good;

    // Richardson with vbar ~_{1/2} v
    Vec vbar(m);
    for (int i = 0; i < m; ++i) vbar[i] = v[i] * std::exp(rng.uniform(-0.5, 0.5));
    Vec b = testgen::random_vec(n, rng);
    const auto sol = im.solve(vbar, b, 1e-8, 40);
    if (approx_01) {
      CHECK(sol.converged);
      CHECK(sol.sweeps <= 40);
    }
  }
  CHECK(good >= trials - 1);  // ~99% of seeds
}

TEST_CASE("inverse maintenance: exact preconditioner converges in few sweeps") {
  Rng rng(19);
  const int n = 8, m = 60;
  const auto a = testgen::random_two_sparse(m, n, rng);
  Vec v(m, 1.0);
  Vec sbar(m, 1.0);  // p_i = 1: S = I, preconditioner exact
  InverseMaintenance im(a, v, sbar, {40.0, 5});
  Vec b = testgen::random_vec(n, rng);
  const auto sol = im.solve(v, b, 1e-12, 40);
  CHECK(sol.converged);
  CHECK(sol.sweeps <= 30);
  // residual check against a dense solve
  DenseSpdSolver ds;
  ds.factor(a.gram(v));
  const Vec want = ds.solve(b);
  for (int i = 0; i < n; ++i) CHECK(sol.x[i] == doctest::Approx(want[i]).epsilon(1e-6));
}

TEST_CASE("inverse maintenance: scale storm then solve") {
  Rng rng(23);
  const int n = 10, m = 120;
  const auto a = testgen::random_two_sparse(m, n, rng);
  Vec v(m, 1.0);
  const auto lev = leverage_scores(a, v);
  InverseMaintenance im(a, v, lev.sigma, {40.0, 77});
  for (int k = 0; k < 1000; ++k) {
    const int i = static_cast<int>(rng.index(m));
    v[i] = std::exp(rng.uniform(-0.4, 0.4));
    im.scale(i, v[i], lev.sigma[i]);
  }
  Vec b = testgen::random_vec(n, rng);
  const auto sol = im.solve(v, b, 1e-8, 40);
  CHECK(sol.converged);
  DenseSpdSolver ds;
  ds.factor(a.gram(v));
  const Vec want = ds.solve(b);
  for (int i = 0; i < n; ++i) CHECK(sol.x[i] == doctest::Approx(want[i]).epsilon(1e-5));
}
