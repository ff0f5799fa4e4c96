#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gflow/oracles.hpp"
#include "support.hpp"

using namespace gflow;

TEST_CASE("exact heavy set basics") {
  TwoSparseMatrix id2(2);
  TsEntry e0[1] = {{0, 1.0}}, e1[1] = {{1, 1.0}};
  id2.add_row(e0);
  id2.add_row(e1);
  CHECK(oracle::exact_heavy_set(id2, {0.0, 0.0}, 0.5).empty());
  CHECK(oracle::exact_heavy_set(id2, {3.0, 1.0}, 2.0) == std::vector<int>{0});
}

TEST_CASE("vertex enumeration solves the textbook example") {
  // min x1 s.t. x1 + x2 = 1, 0 <= x <= 1
  LpInstance inst;
  inst.a = TwoSparseMatrix(1);
  TsEntry e[1] = {{0, 1.0}};
  inst.a.add_row(e);
  inst.a.add_row(e);
  inst.b = {1.0};
  inst.c = {1.0, 0.0};
  inst.l = {0.0, 0.0};
  inst.u = {1.0, 1.0};
  const auto r = oracle::lp_vertex_enumerate(inst);
  REQUIRE(r.feasible);
  CHECK(r.opt == doctest::Approx(0.0));
  CHECK(r.x[0] == doctest::Approx(0.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
  const auto s = oracle::lp_simplex(inst);
  REQUIRE(s.feasible);
  CHECK(s.opt == doctest::Approx(0.0));
}

TEST_CASE("single lossy edge mincost flow has a unique feasible point") {
  // f = 2 forced by im_s = -2 (gamma = 0.5, u = 2, c = 1 -> cost 2)
  LpInstance inst;
  inst.a = TwoSparseMatrix(2);
  TsEntry e[2] = {{0, -1.0}, {1, 0.5}};
  inst.a.add_row(e);
  inst.b = {-2.0, 1.0};
  inst.c = {1.0};
  inst.l = {0.0};
  inst.u = {2.0};
  const auto r = oracle::lp_vertex_enumerate(inst);
  REQUIRE(r.feasible);
  CHECK(r.opt == doctest::Approx(2.0));
}

TEST_CASE("infeasible instance reported") {
  LpInstance inst;
  inst.a = TwoSparseMatrix(1);
  TsEntry e[1] = {{0, 1.0}};
  inst.a.add_row(e);
  inst.b = {5.0};  // x <= 1 cannot reach 5
  inst.c = {1.0};
  inst.l = {0.0};
  inst.u = {1.0};
  CHECK_FALSE(oracle::lp_vertex_enumerate(inst).feasible);
  CHECK_FALSE(oracle::lp_simplex(inst).feasible);
}

TEST_CASE("cross-implementation agreement on random instances") {
  Rng rng(101);
  int feasible = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng r = rng.child(seed);
    const int n = 2 + static_cast<int>(r.index(3));
    const int m = n + 2 + static_cast<int>(r.index(6));
    const LpInstance inst = testgen::random_feasible_lp(m, n, r);
    const auto a = oracle::lp_vertex_enumerate(inst);
    const auto b = oracle::lp_simplex(inst);
    REQUIRE(a.feasible);
    REQUIRE(b.feasible);
    ++feasible;
    CHECK(a.opt == doctest::Approx(b.opt).epsilon(1e-6));
    // simplex point must be feasible for the instance
    Vec resid = inst.b;
    for (int row = 0; row < m; ++row) {
      const TsEntry* e = inst.a.row(row);
      for (int k = 0; k < inst.a.row_nnz(row); ++k) resid[e[k].col] -= e[k].val * b.x[row];
      CHECK(b.x[row] >= inst.l[row] - 1e-7);
      CHECK(b.x[row] <= inst.u[row] + 1e-7);
    }
    for (double v : resid) CHECK(std::fabs(v) < 1e-6);
  }
  CHECK(feasible == 100);
}

TEST_CASE("dense leverage scores sum to the rank") {
  Rng rng(103);
  Mat a(20, 6);
  for (auto& v : a.a) v = rng.gaussian();
  const Vec sig = oracle::dense_leverage_scores(a);
  double sum = 0.0;
  for (double s : sig) {
    CHECK(s >= -1e-10);
    CHECK(s <= 1.0 + 1e-10);
    sum += s;
  }
  CHECK(sum == doctest::Approx(6.0).epsilon(1e-8));
}
