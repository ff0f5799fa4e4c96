#include "gflow/hh_general.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace gflow {

GeneralLossyHh::GeneralLossyHh(int n, Config cfg) : n_(n), cfg_(cfg), rng_(cfg.seed) {
  if (n <= 1) throw std::invalid_argument("general hh: need at least two vertices");
}

GeneralLossyHh::BucketKey GeneralLossyHh::key_of(int tail, int head, double eta,
                                                 double g) const {
  BucketKey k;
  const unsigned x = static_cast<unsigned>(tail) ^ static_cast<unsigned>(head);
  k.bit = std::countr_zero(x);
  k.dir = (static_cast<unsigned>(tail) >> k.bit) & 1u;
  k.eta_idx = static_cast<long>(std::floor(std::log(eta) / std::log1p(cfg_.beta) + 1e-12));
  k.w_idx = static_cast<long>(std::floor(std::log2(g / g_ref_) + 1e-12));
  return k;
}

double GeneralLossyHh::scale_factor(const BucketKey& k, int vertex) const {
  // tail side of the bucket is scaled by (1+beta)^{-j}
  const bool tail_side = (((static_cast<unsigned>(vertex) >> k.bit) & 1u) ==
                          static_cast<unsigned>(k.dir));
  return tail_side ? std::pow(1.0 + cfg_.beta, -static_cast<double>(k.eta_idx)) : 1.0;
}

GeneralLossyHh::Bucket& GeneralLossyHh::bucket(const BucketKey& k) {
  auto it = buckets_.find(k);
  if (it != buckets_.end()) return it->second;
  Bucket b;
  BalancedHh::Config bc;
  bc.eps_ad = cfg_.eps_ad;
  bc.phi = cfg_.phi;
  bc.beta = cfg_.beta;
  bc.seed = rng_.raw();
  bc.dense_cap = cfg_.dense_cap;
  bc.debug_checks = cfg_.debug_checks;
  b.ds = std::make_unique<BalancedHh>(n_, bc);
  return buckets_.emplace(k, std::move(b)).first->second;
}

void GeneralLossyHh::place(int e) {
  EdgeRec& rec = edges_[e];
  rec.key = key_of(rec.tail, rec.head, rec.eta, rec.g);
  Bucket& b = bucket(rec.key);
  // scaled multiplier lies in [1, 1+beta]
  const double eta_scaled = rec.eta * scale_factor(rec.key, rec.tail) /
                            scale_factor(rec.key, rec.head);
  const double clamped = std::min(std::max(eta_scaled, 1.0), 1.0 + cfg_.beta);
  rec.sub_id = b.ds->insert(rec.tail, rec.head, clamped, rec.tau);
  if (static_cast<int>(b.owner_of.size()) <= rec.sub_id) b.owner_of.resize(rec.sub_id + 1, -1);
  b.owner_of[rec.sub_id] = e;
  b.live++;
}

int GeneralLossyHh::insert(int tail, int head, double eta, double g, double tau, int sign) {
  if (!(g > 0.0)) throw std::invalid_argument("general hh: weight must be positive");
  if (!(eta >= 1.0)) throw std::invalid_argument("general hh: multiplier must be >= 1");
  if (tail == head || tail < 0 || head < 0 || tail >= n_ || head >= n_)
    throw std::invalid_argument("general hh: bad endpoints");
  if (g_ref_ == 0.0) {
    g_ref_ = g;
    g_min_seen_ = g_max_seen_ = g;
  }
  g_min_seen_ = std::min(g_min_seen_, g);
  g_max_seen_ = std::max(g_max_seen_, g);
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({tail, head, eta, g, tau, sign, true, {}, -1});
  ++m_live_;
  if (g_max_seen_ / g_min_seen_ > cfg_.w_g_declared * cfg_.w_g_declared) {
    ++weight_cap_rebuilds_;
    full_rebuild();
  } else {
    place(id);
  }
  return id;
}

void GeneralLossyHh::full_rebuild() {
  buckets_.clear();
  g_ref_ = 0.0;
  for (const auto& rec : edges_)
    if (rec.alive) {
      if (g_ref_ == 0.0) g_ref_ = rec.g;
      g_ref_ = std::min(g_ref_, rec.g);
    }
  g_min_seen_ = g_max_seen_ = g_ref_;
  for (auto& rec : edges_)
    if (rec.alive) {
      g_min_seen_ = std::min(g_min_seen_, rec.g);
      g_max_seen_ = std::max(g_max_seen_, rec.g);
    }
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e)
    if (edges_[e].alive) place(e);
}

void GeneralLossyHh::del(int e) {
  if (!edge_alive(e)) throw std::invalid_argument("general hh: delete of unknown edge");
  EdgeRec& rec = edges_[e];
  Bucket& b = buckets_.at(rec.key);
  b.ds->del(rec.sub_id);
  b.owner_of[rec.sub_id] = -1;
  b.live--;
  rec.alive = false;
  rec.sub_id = -1;
  --m_live_;
}

void GeneralLossyHh::scale(int e, double g) {
  if (!edge_alive(e)) throw std::invalid_argument("general hh: scale of unknown edge");
  if (!(g > 0.0)) throw std::invalid_argument("general hh: weight must be positive");
  EdgeRec& rec = edges_[e];
  g_min_seen_ = std::min(g_min_seen_, g);
  g_max_seen_ = std::max(g_max_seen_, g);
  if (g_max_seen_ / g_min_seen_ > cfg_.w_g_declared * cfg_.w_g_declared) {
    rec.g = g;
    ++weight_cap_rebuilds_;
    full_rebuild();
    return;
  }
  const BucketKey nk = key_of(rec.tail, rec.head, rec.eta, g);
  if (!(nk < rec.key) && !(rec.key < nk)) {  // same bucket
    rec.g = g;
    return;
  }
  Bucket& ob = buckets_.at(rec.key);
  ob.ds->del(rec.sub_id);
  ob.owner_of[rec.sub_id] = -1;
  ob.live--;
  rec.g = g;
  place(e);
}

void GeneralLossyHh::scale_tau(int e, double b) {
  if (!edge_alive(e)) throw std::invalid_argument("general hh: scale_tau of unknown edge");
  EdgeRec& rec = edges_[e];
  rec.tau = b;
  buckets_.at(rec.key).ds->scale_tau(rec.sub_id, b);
}

bool GeneralLossyHh::edge_alive(int e) const {
  return e >= 0 && e < static_cast<int>(edges_.size()) && edges_[e].alive;
}

double GeneralLossyHh::row_value(int e, const Vec& h) const {
  const EdgeRec& rec = edges_[e];
  return rec.sign * rec.g * (h[rec.head] - rec.eta * h[rec.tail]);
}

std::vector<int> GeneralLossyHh::query_heavy(const Vec& h, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("general hh: eps must be positive");
  if (static_cast<int>(h.size()) != n_) throw std::invalid_argument("general hh: h length");
  std::vector<int> out;
  Vec hb(n_);
  for (auto& [key, b] : buckets_) {
    if (b.live == 0) continue;
    for (int i = 0; i < n_; ++i) hb[i] = h[i] / scale_factor(key, i);
    // lower bound on eps / g_e over the bucket; clamping down only adds
    // candidates, the exact filter below keeps the answer tight
    const double geps = eps / (g_ref_ * std::pow(2.0, static_cast<double>(key.w_idx) + 1.0));
    for (int le : b.ds->query_heavy(hb, std::max(1e-300, geps))) {
      const int e = b.owner_of[le];
      if (e >= 0 && std::fabs(row_value(e, h)) >= eps) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double GeneralLossyHh::norm_estimate(const Vec& h) {
  double l = 0.0;
  Vec hb(n_);
  for (auto& [key, b] : buckets_) {
    if (b.live == 0) continue;
    for (int i = 0; i < n_; ++i) hb[i] = h[i] / scale_factor(key, i);
    const double gcap = g_ref_ * std::pow(2.0, static_cast<double>(key.w_idx) + 1.0);
    l += gcap * gcap * b.ds->norm_estimate(hb);
  }
  return l;
}

std::pair<Vec, double> GeneralLossyHh::sample_weights(const Vec& h, double c1, double c2,
                                                      double c3) {
  // per-bucket C1^{(k)} as in the general-graph sampler, C2_bar = C2/sqrt(n)
  const double l = norm_estimate(h);
  Vec q(edges_.size(), 0.0);
  double sum = 0.0;
  if (m_live_ == 0) return {q, 0.0};
  const double m = static_cast<double>(m_live_);
  const double sqn = std::sqrt(static_cast<double>(n_));
  const double p4 = std::pow(cfg_.phi, 4.0);
  Vec hb(n_);
  for (auto& [key, b] : buckets_) {
    if (b.live == 0) continue;
    for (int i = 0; i < n_; ++i) hb[i] = h[i] / scale_factor(key, i);
    const double gcap = g_ref_ * std::pow(2.0, static_cast<double>(key.w_idx) + 1.0);
    const double c1b = l > 0.0 ? c1 * (m / sqn) * gcap * gcap / (p4 * l) : 0.0;
    auto [ql, sl] = b.ds->sample_weights(hb, c1b, c2 / sqn, c3);
    sum += sl;
    for (size_t k = 0; k < ql.size(); ++k)
      if (ql[k] != 0.0 && k < b.owner_of.size() && b.owner_of[k] >= 0) q[b.owner_of[k]] = ql[k];
  }
  return {q, sum};
}

std::vector<std::pair<int, double>> GeneralLossyHh::sample(const Vec& h, double c0, double c1,
                                                           double c2, double c3) {
  const double l = norm_estimate(h);
  std::vector<std::pair<int, double>> out;
  if (m_live_ == 0) return out;
  const double m = static_cast<double>(m_live_);
  const double sqn = std::sqrt(static_cast<double>(n_));
  const double p4 = std::pow(cfg_.phi, 4.0);
  Vec hb(n_);
  for (auto& [key, b] : buckets_) {
    if (b.live == 0) continue;
    for (int i = 0; i < n_; ++i) hb[i] = h[i] / scale_factor(key, i);
    const double gcap = g_ref_ * std::pow(2.0, static_cast<double>(key.w_idx) + 1.0);
    const double c1b = l > 0.0 ? c1 * (m / sqn) * gcap * gcap / (p4 * l) : 0.0;
    for (auto [le, w] : b.ds->sample(hb, c0, c1b, c2 / sqn, c3)) {
      const int e = b.owner_of[le];
      if (e >= 0) out.push_back({e, w});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

BalancedHh::Stats GeneralLossyHh::stats() const {
  BalancedHh::Stats st;
  for (const auto& [key, b] : buckets_) {
    const auto s = b.ds->stats();
    st.rebuilds += s.rebuilds;
    st.subgraph_destructs += s.subgraph_destructs;
    st.prune_rebuild_signals += s.prune_rebuild_signals;
    st.resets_query += s.resets_query;
    st.resets_delete += s.resets_delete;
    st.renorm_violations += s.renorm_violations;
    st.jl_checks += s.jl_checks;
    st.jl_violations_102 += s.jl_violations_102;
    st.candidate_work += s.candidate_work;
    st.filter_evals += s.filter_evals;
    st.max_resets_query_one_ds = std::max(st.max_resets_query_one_ds, s.max_resets_query_one_ds);
    st.max_resets_delete_one_ds =
        std::max(st.max_resets_delete_one_ds, s.max_resets_delete_one_ds);
    st.counter_bound_ok = st.counter_bound_ok && s.counter_bound_ok;
  }
  return st;
}

}  // namespace gflow
