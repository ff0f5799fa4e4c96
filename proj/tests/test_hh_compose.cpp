#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "gflow/expander_decomp.hpp"
#include "gflow/hh_balanced.hpp"
#include "gflow/hh_general.hpp"
#include "gflow/hh_two_sparse.hpp"
#include "gflow/oracles.hpp"
#include "gflow/spectral.hpp"
#include "support.hpp"

using namespace gflow;

namespace {

void check_partition(const LossyGraph& g, const std::vector<DecompPart>& parts,
                     double phi_target) {
  std::vector<int> seen(g.m(), 0);
  for (const auto& p : parts) {
    CHECK(p.cert_phi >= phi_target - 1e-12);
    for (int e : p.edge_ids) seen[e]++;
  }
  for (int e = 0; e < g.m(); ++e) CHECK(seen[e] == 1);
}

}  // namespace

TEST_CASE("decomposition: K8 certifies as one part") {
  LossyGraph g = testgen::complete_graph(8);
  const auto parts = decompose_expanders(g, 0.2);
  check_partition(g, parts, 0.2);
  CHECK(parts.size() == 1);
}

TEST_CASE("decomposition: two cliques joined by one edge split apart") {
  LossyGraph g;
  g.n = 16;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) {
      g.edges.push_back({i, j, 1.0, 1.0});
      g.edges.push_back({8 + i, 8 + j, 1.0, 1.0});
    }
  g.edges.push_back({0, 8, 1.0, 1.0});
  const auto parts = decompose_expanders(g, 0.2);
  check_partition(g, parts, 0.2);
  CHECK(parts.size() >= 2);
  // the bridge sits alone or in a tiny part
  for (const auto& p : parts) {
    bool has_bridge = false;
    for (int e : p.edge_ids) has_bridge |= e == g.m() - 1;
    if (has_bridge) CHECK(p.edge_ids.size() <= 2);
  }
}

TEST_CASE("decomposition: single edge is a trivial part") {
  LossyGraph g;
  g.n = 2;
  g.edges.push_back({0, 1, 1.0, 1.0});
  const auto parts = decompose_expanders(g, 0.3);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].cert_phi == 1.0);
}

TEST_CASE("decomposition on random sparse graphs is exhaustive and certified") {
  Rng rng(7);
  for (int t = 0; t < 4; ++t) {
    LossyGraph g = testgen::random_regular(24, 4, rng);
    const double target = 0.2;
    const auto parts = decompose_expanders(g, target, 400, t);
    check_partition(g, parts, target);
    // verify certificates against the exact/dense oracle on each part
    for (const auto& p : parts) {
      if (p.edge_ids.size() <= 1) continue;
      LossyGraph sub;
      sub.n = g.n;
      std::vector<int> vid(g.n, -1);
      int nv = 0;
      for (int e : p.edge_ids) {
        for (int v : {g.edges[e].tail, g.edges[e].head})
          if (vid[v] < 0) vid[v] = nv++;
        sub.edges.push_back({vid[g.edges[e].tail], vid[g.edges[e].head], 1.0, 1.0});
      }
      sub.n = nv;
      if (nv <= 14) {
        CHECK(conductance_exact(sub, 0).phi >= p.cert_phi - 1e-9);
      } else {
        const double l2 = dense_eigs(build_incidence(sub).normalized_smooth()).values[1];
        CHECK(l2 / 2.0 >= p.cert_phi - 1e-9);  // Cheeger certificate is honest
      }
    }
  }
}

namespace {

BalancedHh::Config bal_cfg(uint64_t seed) {
  BalancedHh::Config cfg;
  cfg.phi = 0.02;
  cfg.beta = 1e-4;
  cfg.eps_ad = 1e-8;
  cfg.seed = seed;
  return cfg;
}

std::vector<int> ref_heavy_bal(const BalancedHh& ds, int medges, const Vec& h, double eps) {
  std::vector<int> out;
  for (int e = 0; e < medges; ++e)
    if (ds.edge_alive(e) && std::fabs(ds.row_value(e, h)) >= eps) out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("balanced structure: insert cascade keeps levels within capacity") {
  Rng rng(11);
  BalancedHh ds(16, bal_cfg(3));
  for (int k = 0; k < 40; ++k) {
    const int a = static_cast<int>(rng.index(16));
    int b = static_cast<int>(rng.index(16));
    while (b == a) b = static_cast<int>(rng.index(16));
    ds.insert(a, b, 1.0 + 1e-4 * rng.uniform());
    ds.check_invariants();
  }
  CHECK(ds.live_edge_count() == 40);
  CHECK_THROWS(ds.insert(0, 1, 1.5));  // eta out of [1, 1+beta]
  CHECK_THROWS(ds.insert(0, 0, 1.0));
}

TEST_CASE("balanced structure: deletion cascades, rebuilds and exactness") {
  Rng rng(13);
  const int n = 24;
  BalancedHh ds(n, bal_cfg(5));
  std::vector<int> ids;
  LossyGraph g = testgen::balanced_expander(n, 6, 1e-4, rng);
  for (const auto& e : g.edges) ids.push_back(ds.insert(e.tail, e.head, e.eta, 0.0));
  const int m0 = static_cast<int>(ids.size());
  long checked = 0;
  for (int op = 0; op < 400; ++op) {
    const double roll = rng.uniform();
    if (roll < 0.25 && ds.live_edge_count() > m0 / 3) {
      // delete a random live edge
      size_t k = rng.index(ids.size());
      for (size_t tries = 0; tries < ids.size(); ++tries, k = (k + 1) % ids.size())
        if (ds.edge_alive(ids[k])) break;
      ds.del(ids[k]);
    } else if (roll < 0.35) {
      const int a = static_cast<int>(rng.index(n));
      int b = static_cast<int>(rng.index(n));
      while (b == a) b = static_cast<int>(rng.index(n));
      ids.push_back(ds.insert(a, b, 1.0 + 1e-4 * rng.uniform()));
    } else if (roll < 0.45) {
      int e = static_cast<int>(rng.index(static_cast<int>(ids.size())));
      if (ds.edge_alive(ids[e])) ds.scale_tau(ids[e], rng.uniform());
    } else {
      Vec h = testgen::random_vec(n, rng);
      const double eps = rng.uniform(0.05, 1.2);
      const auto got = ds.query_heavy(h, eps);
      CHECK(got == ref_heavy_bal(ds, static_cast<int>(ids.size()), h, eps));
      ++checked;
    }
    if (op % 50 == 0) ds.check_invariants();
  }
  ds.check_invariants();
  CHECK(checked > 150);
  const auto st = ds.stats();
  CHECK(st.counter_bound_ok);
  CHECK(st.renorm_violations == 0);
}

TEST_CASE("degree prune example: vertex dropping below a ninth of its degree") {
  // spelled out on a star-10: deleting 9 of 10 edges pulls the last one in
  Rng rng(17);
  BalancedHh ds(12, bal_cfg(7));
  std::vector<int> star;
  for (int k = 0; k < 10; ++k) star.push_back(ds.insert(0, 1 + k, 1.0));
  // also a clique to keep things connected enough for decomposition
  for (int i = 1; i < 11; ++i)
    for (int j = i + 1; j < 11; ++j) ds.insert(i, j, 1.0);
  for (int k = 0; k < 9; ++k) ds.del(star[k]);
  ds.check_invariants();  // degree rule must hold for the survivor
}

TEST_CASE("general lossy graph: weights, eta buckets, scale moves buckets") {
  Rng rng(19);
  GeneralLossyHh::Config cfg;
  cfg.seed = 23;
  const int n = 16;
  GeneralLossyHh ds(n, cfg);
  LossyGraph g = testgen::random_regular(n, 4, rng);
  std::vector<int> ids;
  for (const auto& e : g.edges) {
    const double eta = std::exp(rng.uniform(0.0, 1.5));  // spread multipliers
    const double w = std::exp(rng.uniform(-3.0, 3.0));   // weights across 2^8
    ids.push_back(ds.insert(e.tail, e.head, eta, w));
  }
  auto reference = [&](const Vec& h, double eps) {
    std::vector<int> out;
    for (int e : ids)
      if (ds.edge_alive(e) && std::fabs(ds.row_value(e, h)) >= eps) out.push_back(e);
    return out;
  };
  long checked = 0;
  for (int op = 0; op < 300; ++op) {
    const double roll = rng.uniform();
    if (roll < 0.15 && ds.live_edge_count() > 10) {
      int e = ids[rng.index(ids.size())];
      if (ds.edge_alive(e)) ds.del(e);
    } else if (roll < 0.35) {
      int e = ids[rng.index(ids.size())];
      if (ds.edge_alive(e)) ds.scale(e, std::exp(rng.uniform(-3.0, 3.0)));
    } else if (roll < 0.45) {
      const int a = static_cast<int>(rng.index(n));
      int b = static_cast<int>(rng.index(n));
      while (b == a) b = static_cast<int>(rng.index(n));
      ids.push_back(ds.insert(a, b, std::exp(rng.uniform(0.0, 1.0)),
                              std::exp(rng.uniform(-2.0, 2.0))));
    } else {
      Vec h = testgen::random_vec(n, rng);
      const double eps = rng.uniform(0.05, 0.9);
      CHECK(ds.query_heavy(h, eps) == reference(h, eps));
      ++checked;
    }
  }
  CHECK(checked > 100);
  // norm bracket
  for (int t = 0; t < 40; ++t) {
    Vec h = testgen::random_vec(n, rng);
    double truth = 0.0;
    for (int e : ids)
      if (ds.edge_alive(e)) {
        const double v = ds.row_value(e, h);
        truth += v * v;
      }
    CHECK(ds.norm_estimate(h) >= truth * (1 - 1e-9));
  }
}

TEST_CASE("two-sparse reduction: figure cases and the identity") {
  const int n = 3;
  {  // same sign
    TsEntry e[2] = {{0, 2.0}, {2, 3.0}};
    const auto r = reduce_two_sparse_row(e, 2, n);
    CHECK(r.head == 0);  // G = 2, eta = 3/2, tail = n+2
    CHECK(r.tail == n + 2);
    CHECK(r.g == 2.0);
    CHECK(r.eta == doctest::Approx(1.5));
    CHECK(r.sign == 1);
  }
  {  // opposite signs stay in place
    TsEntry e[2] = {{0, 2.0}, {1, -0.5}};
    const auto r = reduce_two_sparse_row(e, 2, n);
    CHECK(((r.head == 0 && r.tail == 1) || (r.head == 1 && r.tail == 0)));
    CHECK(r.eta >= 1.0);
  }
  {  // single entry splits alpha/2
    TsEntry e[1] = {{1, 4.0}};
    const auto r = reduce_two_sparse_row(e, 1, n);
    CHECK(r.g == 2.0);
    CHECK(r.eta == 1.0);
    CHECK(((r.head == 1 && r.tail == n + 1)));
  }
  TsEntry z[1] = {{0, 0.0}};
  CHECK_THROWS(reduce_two_sparse_row(z, 0, n));

  Rng rng(29);
  for (int t = 0; t < 50; ++t) {
    const auto a = testgen::random_two_sparse(20, 5, rng);
    const auto red = two_sparse_reduce(a);
    const Vec h = testgen::random_vec(5, rng);
    Vec hh(10);
    for (int i = 0; i < 5; ++i) {
      hh[i] = h[i];
      hh[5 + i] = -h[i];
    }
    const Vec ah = a.matvec(h);
    const double wa = a.magnitude_bound();
    for (int r = 0; r < 20; ++r) {
      const auto& row = red.rows[r];
      const double v = row.sign * row.g * (hh[row.head] - row.eta * hh[row.tail]);
      CHECK(v == doctest::Approx(ah[r]).epsilon(1e-12));
      CHECK(row.eta <= wa * wa * (1 + 1e-12));
      CHECK(row.g <= wa * (1 + 1e-12));
      CHECK(1.0 / row.g <= 2.0 * wa * (1 + 1e-12));  // split single-entry rows halve alpha
    }
  }
}

TEST_CASE("rayleigh transfer identity of the reduction") {
  Rng rng(31);
  const auto a = testgen::random_two_sparse(30, 6, rng);
  const auto red = two_sparse_reduce(a);
  for (int t = 0; t < 20; ++t) {
    const Vec h = testgen::random_vec(6, rng);
    Vec hh(12);
    for (int i = 0; i < 6; ++i) {
      hh[i] = h[i];
      hh[6 + i] = -h[i];
    }
    double ah2 = 0.0;
    for (double v : a.matvec(h)) ah2 += v * v;
    double gah2 = 0.0;
    for (const auto& row : red.rows) {
      const double v = row.sign * row.g * (hh[row.head] - row.eta * hh[row.tail]);
      gah2 += v * v;
    }
    CHECK(gah2 == doctest::Approx(ah2).epsilon(1e-10));
    // ||[h; -h]||^2 = 2||h||^2, so the transfer constant is exactly 1/2
  }
}

TEST_CASE("two-sparse interface: query exactness, scale invariance") {
  Rng rng(37);
  const int n = 6, m = 40;
  TwoSparseHh::Config cfg;
  cfg.general.seed = 41;
  TwoSparseHh ds(n, cfg);
  const auto a = testgen::random_two_sparse(m, n, rng);
  Vec gscale(m, 1.0);
  for (int r = 0; r < m; ++r)
    ds.insert(a.row(r), a.row_nnz(r));
  long checked = 0;
  for (int op = 0; op < 250; ++op) {
    const double roll = rng.uniform();
    if (roll < 0.2) {
      const int i = static_cast<int>(rng.index(m));
      if (ds.row_alive(i)) {
        gscale[i] = std::exp(rng.uniform(-1.5, 1.5)) * (rng.uniform() < 0.3 ? -1.0 : 1.0);
        ds.scale(i, gscale[i]);
      }
    } else {
      Vec h = testgen::random_vec(n, rng, 0.4);
      const double eps = rng.uniform(0.05, 0.95);
      const auto got = ds.query_heavy(h, eps);
      const auto want = oracle::exact_heavy_set_scaled(a, gscale, h, eps);
      CHECK(got == want);
      ++checked;
    }
  }
  CHECK(checked > 100);
  // scale to the same value leaves answers unchanged
  Vec h = testgen::random_vec(n, rng, 0.4);
  const auto before = ds.query_heavy(h, 0.3);
  ds.scale(0, gscale[0]);
  CHECK(ds.query_heavy(h, 0.3) == before);
}

TEST_CASE("sampler interface: deterministic identity when all weights reach one") {
  Rng rng(43);
  const int n = 4, m = 10;
  TwoSparseHh::Config cfg;
  cfg.general.seed = 47;
  cfg.c2 = 10.0;  // C2/sqrt(2n) well above 1 -> q_e >= 1 for every row
  cfg.c0 = 100.0;
  TwoSparseHh ds(n, cfg);
  const auto a = testgen::random_two_sparse(m, n, rng);
  for (int r = 0; r < m; ++r) ds.insert(a.row(r), a.row_nnz(r));
  const Vec h = testgen::random_vec(n, rng);
  const auto res = ds.sample(h);
  CHECK(res.draws == 0);
  REQUIRE(res.r.size() == static_cast<size_t>(m));
  for (auto [e, w] : res.r) CHECK(w == 1.0);
}

TEST_CASE("sampler interface: unbiased on fractional rows") {
  Rng rng(53);
  const int n = 4, m = 12;
  TwoSparseHh::Config cfg;
  cfg.general.seed = 59;
  cfg.c0 = 50.0;
  cfg.c1 = 2.0;
  cfg.c2 = 0.4;
  cfg.c3 = 0.3;
  TwoSparseHh ds(n, cfg);
  const auto a = testgen::random_two_sparse(m, n, rng);
  for (int r = 0; r < m; ++r) {
    ds.insert(a.row(r), a.row_nnz(r));
    ds.scale_tau(r, rng.uniform());
  }
  const Vec h = testgen::random_vec(n, rng, 0.3);
  std::map<int, double> acc;
  const int reps = 400;
  for (int rep = 0; rep < reps; ++rep)
    for (auto [e, w] : ds.sample(h).r) acc[e] += w;
  for (int e = 0; e < m; ++e) {
    const double mean = acc.count(e) ? acc[e] / reps : 0.0;
    CHECK(std::fabs(mean - 1.0) <= 0.2);  // ~6 sigma at these parameters
  }
}

TEST_CASE("weight-cap breach triggers a full rebuild and stays exact") {
  GeneralLossyHh::Config cfg;
  cfg.seed = 61;
  cfg.w_g_declared = 4.0;  // rebuild once the ratio passes 16
  GeneralLossyHh ds(4, cfg);
  const int e0 = ds.insert(0, 1, 1.0, 1.0);
  const int e1 = ds.insert(1, 2, 1.0, 1.0);
  ds.scale(e1, 100.0);  // ratio 100 > 16
  CHECK(ds.rebuilds_weight_cap() >= 1);
  Vec h{1.0, 0.0, 0.0, 0.0};
  const auto got = ds.query_heavy(h, 0.5);
  CHECK(got == std::vector<int>{e0});
  (void)e0;
}
