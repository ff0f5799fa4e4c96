#include "gflow/hh_balanced.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "gflow/expander_decomp.hpp"
#include "gflow/spectral.hpp"

namespace gflow {

int BalancedHh::alloc_subgraph() {
  int subidx;
  if (!free_subs_.empty()) {
    subidx = free_subs_.back();
    free_subs_.pop_back();
    const uint64_t gen = subs_[subidx].gen + 1;
    subs_[subidx] = Subgraph{};
    subs_[subidx].gen = gen;
  } else {
    subidx = static_cast<int>(subs_.size());
    subs_.push_back({});
  }
  subs_[subidx].self = subidx;
  return subidx;
}

BalancedHh::BalancedHh(int n, Config cfg) : n_(n), cfg_(cfg), rng_(cfg.seed) {
  if (n <= 0) throw std::invalid_argument("balanced hh: need at least one vertex");
  if (!(cfg_.phi > 0.0) || 10.0 * cfg_.phi > 1.0)
    throw std::invalid_argument("balanced hh: phi out of range (decomposition target 10*phi)");
  if (cfg_.beta > cfg_.phi * cfg_.phi * 100.0 && cfg_.beta > 1e-3)
    throw std::invalid_argument("balanced hh: beta too large for phi");
  ensure_levels(1);
}

void BalancedHh::ensure_levels(size_t count) {
  while (levels_.size() < count) levels_.push_back({});
}

int BalancedHh::insert(int a, int b, double eta, double tau) {
  if (a < 0 || a >= n_ || b < 0 || b >= n_ || a == b)
    throw std::invalid_argument("balanced hh: bad endpoints");
  if (!(eta >= 1.0) || eta > 1.0 + cfg_.beta * (1.0 + 1e-12))
    throw std::invalid_argument("balanced hh: multiplier outside [1, 1+beta]");
  if (tau < 0.0) throw std::invalid_argument("balanced hh: negative tau");
  const int id = static_cast<int>(edges_.size());
  EdgeRec rec;
  rec.data = {a, b, eta, 1.0};
  rec.tau = tau;
  rec.alive = true;
  edges_.push_back(rec);
  ++m_live_;
  insert_internal(id);
  return id;
}

void BalancedHh::insert_internal(int edge_id) {
  // new singleton subgraph at level 1, then the Algorithm-3 cascade
  const int subidx = alloc_subgraph();
  Subgraph& s = subs_[subidx];
  s.alive = true;
  s.edge_ids = {edge_id};
  ensure_levels(1);
  levels_[0].subs.push_back(subidx);
  levels_[0].live_edges += 1;
  edges_[edge_id].level = 0;
  edges_[edge_id].sub = subidx;
  edges_[edge_id].local = 0;

  for (size_t l = 0;; ++l) {
    ensure_levels(l + 1);
    const long cap = 1L << (l + 1);  // level l (0-based) holds up to 2^{l+1}
    if (levels_[l].live_edges <= cap) {
      rebuild(static_cast<int>(l));
      break;
    }
    ensure_levels(l + 2);
    for (int si : levels_[l].subs) {
      levels_[l + 1].subs.push_back(si);
      for (int e : subs_[si].edge_ids)
        if (edges_[e].alive && edges_[e].sub == si) edges_[e].level = static_cast<int>(l) + 1;
    }
    levels_[l + 1].live_edges += levels_[l].live_edges;
    levels_[l].subs.clear();
    levels_[l].live_edges = 0;
  }
}

void BalancedHh::absorb_ds_stats(const ExpanderHh& ds) {
  const auto& st = ds.stats();
  retired_.resets_query += st.resets_query;
  retired_.resets_delete += st.resets_delete;
  retired_.renorm_violations += st.renorm_violations;
  retired_.jl_checks += st.jl_checks;
  retired_.jl_violations_102 += st.jl_violations_102;
  retired_.candidate_work += st.candidate_work;
  retired_.filter_evals += st.filter_evals;
  retired_.max_resets_query_one_ds = std::max(retired_.max_resets_query_one_ds, st.resets_query);
  retired_.max_resets_delete_one_ds =
      std::max(retired_.max_resets_delete_one_ds, st.resets_delete);
}

void BalancedHh::rebuild(int level) {
  ++retired_.rebuilds;
  std::vector<int> edge_ids;
  for (int si : levels_[level].subs) {
    Subgraph& s = subs_[si];
    for (int e : s.edge_ids)
      if (edges_[e].alive && edges_[e].sub == si) edge_ids.push_back(e);
    if (s.ds) absorb_ds_stats(*s.ds);
    s = Subgraph{};
    free_subs_.push_back(si);
  }
  levels_[level].subs.clear();
  levels_[level].live_edges = static_cast<long>(edge_ids.size());
  if (edge_ids.empty()) return;

  // local graph over the level's edges
  LossyGraph lg;
  std::vector<int> vert_of, vid(n_, -1);
  for (int e : edge_ids) {
    for (int v : {edges_[e].data.tail, edges_[e].data.head})
      if (vid[v] < 0) {
        vid[v] = static_cast<int>(vert_of.size());
        vert_of.push_back(v);
      }
    lg.edges.push_back({vid[edges_[e].data.tail], vid[edges_[e].data.head], edges_[e].data.eta, 1.0});
  }
  lg.n = static_cast<int>(vert_of.size());
  const auto parts = decompose_expanders(lg, 10.0 * cfg_.phi, cfg_.dense_cap, rng_.raw());

  for (const auto& part : parts) {
    const int subidx = alloc_subgraph();
    Subgraph& s = subs_[subidx];
    s.alive = true;
    s.cert_phi = part.cert_phi;
    LossyGraph sg;
    std::vector<int> svid(n_, -1);
    for (int le : part.edge_ids) {
      const int e = edge_ids[le];
      s.edge_ids.push_back(e);
      for (int v : {edges_[e].data.tail, edges_[e].data.head})
        if (svid[v] < 0) {
          svid[v] = static_cast<int>(s.verts.size());
          s.verts.push_back(v);
          s.vid[v] = svid[v];
        }
      sg.edges.push_back(
          {svid[edges_[e].data.tail], svid[edges_[e].data.head], edges_[e].data.eta, 1.0});
    }
    sg.n = static_cast<int>(s.verts.size());
    s.deg_cur.assign(sg.n, 0);
    for (const auto& ed : sg.edges) {
      s.deg_cur[ed.tail]++;
      s.deg_cur[ed.head]++;
    }
    s.deg_init.assign(s.deg_cur.begin(), s.deg_cur.end());
    s.m_init = sg.m();
    s.pruned.assign(sg.n, 0);

    Vec tau(sg.m());
    for (size_t k = 0; k < s.edge_ids.size(); ++k) tau[k] = edges_[s.edge_ids[k]].tau;
    ExpanderHh::Config ec;
    ec.eps_ad = cfg_.eps_ad;
    ec.phi = cfg_.phi;
    ec.seed = rng_.raw();
    ec.lambda2_smooth_lb =
        part.lambda2 > 0.0 ? part.lambda2 : part.cert_phi * part.cert_phi / 2.0;
    ec.debug_checks = cfg_.debug_checks;
    s.ds = std::make_unique<ExpanderHh>(sg, ec, std::move(tau));

    levels_[level].subs.push_back(subidx);
    for (size_t k = 0; k < s.edge_ids.size(); ++k) {
      const int e = s.edge_ids[k];
      edges_[e].level = level;
      edges_[e].sub = subidx;
      edges_[e].local = static_cast<int>(k);
    }
  }
}

void BalancedHh::remove_from_subgraph(Subgraph& s, int edge_id) {
  EdgeRec& rec = edges_[edge_id];
  if (rec.sub != s.self) return;  // idempotent
  const auto& ed = rec.data;
  s.deg_cur[s.vid.at(ed.tail)]--;
  s.deg_cur[s.vid.at(ed.head)]--;
  levels_[rec.level].live_edges--;
  rec.level = rec.sub = rec.local = -1;
}

double BalancedHh::certify_survivor(Subgraph& s) const {
  // conductance lower bound of the bookkeeping graph minus pruned vertices
  LossyGraph sg;
  std::vector<int> vid2(s.verts.size(), -1);
  int nv = 0;
  for (int e : s.edge_ids) {
    if (!edges_[e].alive || edges_[e].sub != s.self) continue;
    const int a = s.vid.at(edges_[e].data.tail), b = s.vid.at(edges_[e].data.head);
    if (s.pruned[a] || s.pruned[b]) continue;
    for (int v : {a, b})
      if (vid2[v] < 0) vid2[v] = nv++;
    sg.edges.push_back({vid2[a], vid2[b], 1.0, 1.0});
  }
  sg.n = nv;
  if (sg.m() == 0) return 1.0;
  if (sg.m() == 1) return 1.0;
  if (!sg.connected()) return 0.0;
  if (nv <= 16) return conductance_exact(sg).phi;
  if (nv <= cfg_.dense_cap) {
    const auto view = build_incidence(sg);
    const auto e = dense_eigs(view.normalized_smooth());
    return e.values[1] / 2.0;
  }
  // too large to certify at desk scale; accept and let the budgets guard
  return 10.0 * cfg_.phi;
}

bool BalancedHh::expander_prune(Subgraph& s, const std::vector<int>& f, std::vector<int>* f_exp,
                                std::vector<int>* f_prime) {
  s.k_del += static_cast<long>(f.size());
  s.deleted_since_cert += static_cast<long>(f.size());
  const long cert_interval = std::max<long>(4, static_cast<long>(cfg_.phi * s.m_init / 20.0));
  if (s.deleted_since_cert < cert_interval) return false;
  s.deleted_since_cert = 0;

  const double required = 10.0 * cfg_.phi / 6.0;
  std::vector<int> newly;
  for (int round = 0; round < static_cast<int>(s.verts.size()) + 1; ++round) {
    if (certify_survivor(s) >= required) break;
    // peel the touched vertices with the lowest surviving degree fraction
    std::vector<std::pair<double, int>> cand;
    for (size_t v = 0; v < s.verts.size(); ++v) {
      if (s.pruned[v] || s.deg_init[v] == 0.0) continue;
      const double ratio = s.deg_cur[v] / s.deg_init[v];
      if (ratio < 1.0) cand.push_back({ratio, static_cast<int>(v)});
    }
    if (cand.empty()) return true;  // cannot restore expansion: rebuild
    std::sort(cand.begin(), cand.end());
    const size_t batch = std::max<size_t>(1, s.verts.size() / 16);
    for (size_t k = 0; k < cand.size() && k < batch; ++k) {
      s.pruned[cand[k].second] = 1;
      s.vol_pruned += s.deg_init[cand[k].second];
      newly.push_back(cand[k].second);
    }
  }
  // classify the live edges at newly pruned vertices
  std::vector<char> isnew(s.verts.size(), 0);
  for (int v : newly) isnew[v] = 1;
  for (int e : s.edge_ids) {
    if (!edges_[e].alive || edges_[e].sub != s.self) continue;
    const int a = s.vid.at(edges_[e].data.tail), b = s.vid.at(edges_[e].data.head);
    const bool na = isnew[a], nb = isnew[b];
    if (!na && !nb) continue;
    if (na && nb) f_prime->push_back(e);
    else if (s.pruned[a] && s.pruned[b]) f_prime->push_back(e);
    else {
      f_exp->push_back(e);
      s.cut_pruned += 1.0;
    }
  }
  // Lemma-6.8 budgets; overflowing them falls back to a rebuild
  if (s.vol_pruned > 8.0 * s.k_del / cfg_.phi || s.cut_pruned > 4.0 * s.k_del) {
    ++retired_.prune_rebuild_signals;
    return true;
  }
  return false;
}

std::vector<int> BalancedHh::degree_prune(Subgraph& s, const std::vector<int>& f) {
  std::vector<int> out;
  std::unordered_set<int> dropped;
  for (int e : f) {
    for (int g : {edges_[e].data.tail, edges_[e].data.head}) {
      const auto it = s.vid.find(g);
      if (it == s.vid.end()) continue;
      const int v = it->second;
      if (s.deg_cur[v] > 0 && s.deg_cur[v] < s.deg_init[v] / 9.0) dropped.insert(v);
    }
  }
  if (dropped.empty()) return out;
  for (int e : s.edge_ids) {
    if (!edges_[e].alive || edges_[e].sub != s.self) continue;
    const int a = s.vid.at(edges_[e].data.tail), b = s.vid.at(edges_[e].data.head);
    if (dropped.count(a) || dropped.count(b)) out.push_back(e);
  }
  return out;
}

void BalancedHh::destruct_subgraph(int subidx) {
  ++retired_.subgraph_destructs;
  Subgraph& s = subs_[subidx];
  std::vector<int> remaining;
  for (int e : s.edge_ids)
    if (edges_[e].alive && edges_[e].sub == subidx) remaining.push_back(e);
  for (int e : remaining) remove_from_subgraph(s, e);
  if (s.ds) absorb_ds_stats(*s.ds);
  auto& lvl = levels_;
  for (auto& l : lvl) l.subs.erase(std::remove(l.subs.begin(), l.subs.end(), subidx), l.subs.end());
  subs_[subidx] = Subgraph{};
  free_subs_.push_back(subidx);
  for (int e : remaining) insert_internal(e);
}

void BalancedHh::del(int e) {
  if (e < 0 || e >= static_cast<int>(edges_.size()) || !edges_[e].alive)
    throw std::invalid_argument("balanced hh: delete of unknown edge");
  const int subidx = edges_[e].sub;
  const uint64_t gen = subs_[subidx].gen;
  std::vector<int> f_tot, local_tot;
  std::unordered_set<int> in_tot;
  auto add_tot = [&](int x) {
    if (in_tot.insert(x).second) {
      f_tot.push_back(x);
      local_tot.push_back(edges_[x].local);  // captured while still homed here
    }
  };
  bool want_rebuild = false;
  {
    Subgraph& s = subs_[subidx];
    ++s.delete_calls;
    std::vector<int> f = {e};
    while (!f.empty()) {
      for (int x : f) add_tot(x);
      s.m_cnt += static_cast<long>(f.size());
      for (int x : f) remove_from_subgraph(s, x);
      std::vector<int> f_exp, f_prime;
      want_rebuild = expander_prune(s, f, &f_exp, &f_prime) || want_rebuild;
      for (int x : f_exp) add_tot(x);
      for (int x : f_prime) add_tot(x);
      for (int x : f_exp) remove_from_subgraph(s, x);
      for (int x : f_prime) remove_from_subgraph(s, x);
      std::vector<int> probe = f;
      probe.insert(probe.end(), f_exp.begin(), f_exp.end());
      std::vector<int> f_deg = degree_prune(s, probe);
      for (int x : f_deg) add_tot(x);
      for (int x : f_deg) remove_from_subgraph(s, x);
      f = std::move(f_deg);
    }
    // one batch deletion on the expander structure
    if (s.ds) s.ds->del(local_tot);
    want_rebuild = want_rebuild || s.m_cnt >= cfg_.phi / 10.0 * s.m_init;
  }

  edges_[e].alive = false;
  --m_live_;
  for (int x : f_tot)
    if (x != e) insert_internal(x);  // may reallocate subs_ and recycle slots

  if (want_rebuild && subs_[subidx].alive && subs_[subidx].gen == gen)
    destruct_subgraph(subidx);
}

void BalancedHh::scale_tau(int e, double b) {
  if (e < 0 || e >= static_cast<int>(edges_.size()) || !edges_[e].alive)
    throw std::invalid_argument("balanced hh: scale_tau on unknown edge");
  if (b < 0.0) throw std::invalid_argument("balanced hh: negative tau");
  edges_[e].tau = b;
  const Subgraph& s = subs_[edges_[e].sub];
  if (!s.ds || edges_[e].local < 0 || s.edge_ids[edges_[e].local] != e)
    throw std::logic_error("balanced hh: edge not present in its subgraph");
  s.ds->scale_tau(edges_[e].local, b);
}

bool BalancedHh::edge_alive(int e) const {
  return e >= 0 && e < static_cast<int>(edges_.size()) && edges_[e].alive;
}

double BalancedHh::row_value(int e, const Vec& h) const {
  const auto& ed = edges_[e].data;
  return h[ed.head] - ed.eta * h[ed.tail];
}

std::vector<int> BalancedHh::query_heavy(const Vec& h, double eps) {
  if (static_cast<int>(h.size()) != n_) throw std::invalid_argument("balanced hh: h length");
  std::vector<int> out;
  for (auto& s : subs_) {
    if (!s.alive || !s.ds) continue;
    Vec hloc(s.verts.size());
    for (size_t k = 0; k < s.verts.size(); ++k) hloc[k] = h[s.verts[k]];
    for (int le : s.ds->query_heavy(hloc, eps)) out.push_back(s.edge_ids[le]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double BalancedHh::norm_estimate(const Vec& h) {
  double l = 0.0;
  for (auto& s : subs_) {
    if (!s.alive || !s.ds) continue;
    Vec hloc(s.verts.size());
    for (size_t k = 0; k < s.verts.size(); ++k) hloc[k] = h[s.verts[k]];
    l += s.ds->norm_estimate(hloc);
  }
  return l;
}

std::vector<std::pair<int, double>> BalancedHh::sample(const Vec& h, double c0, double c1b,
                                                       double c2b, double c3) {
  std::vector<std::pair<int, double>> out;
  for (auto& s : subs_) {
    if (!s.alive || !s.ds) continue;
    Vec hloc(s.verts.size());
    for (size_t k = 0; k < s.verts.size(); ++k) hloc[k] = h[s.verts[k]];
    for (auto [le, w] : s.ds->sample(hloc, c0, c1b, c2b, c3))
      out.push_back({s.edge_ids[le], w});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<Vec, double> BalancedHh::sample_weights(const Vec& h, double c1b, double c2b,
                                                  double c3) {
  Vec q(edges_.size(), 0.0);
  double sum = 0.0;
  for (auto& s : subs_) {
    if (!s.alive || !s.ds) continue;
    Vec hloc(s.verts.size());
    for (size_t k = 0; k < s.verts.size(); ++k) hloc[k] = h[s.verts[k]];
    auto [ql, sl] = s.ds->sample_weights(hloc, c1b, c2b, c3);
    sum += sl;
    for (size_t k = 0; k < s.edge_ids.size(); ++k)
      if (ql[k] != 0.0) q[s.edge_ids[k]] = ql[k];
  }
  return {q, sum};
}

BalancedHh::Stats BalancedHh::stats() const {
  Stats st = retired_;
  for (const auto& s : subs_) {
    if (!s.alive || !s.ds) continue;
    const auto& d = s.ds->stats();
    st.resets_query += d.resets_query;
    st.resets_delete += d.resets_delete;
    st.renorm_violations += d.renorm_violations;
    st.jl_checks += d.jl_checks;
    st.jl_violations_102 += d.jl_violations_102;
    st.candidate_work += d.candidate_work;
    st.filter_evals += d.filter_evals;
    st.max_resets_query_one_ds = std::max(st.max_resets_query_one_ds, d.resets_query);
    st.max_resets_delete_one_ds = std::max(st.max_resets_delete_one_ds, d.resets_delete);
    if (s.delete_calls > 0 && s.m_cnt > 7 * s.delete_calls) st.counter_bound_ok = false;
  }
  return st;
}

void BalancedHh::check_invariants() const {
  // edge-disjointness + union: every live edge sits in exactly one live subgraph
  long live_seen = 0;
  for (size_t l = 0; l < levels_.size(); ++l) {
    long lvl_edges = 0;
    for (int si : levels_[l].subs) {
      const Subgraph& s = subs_[si];
      if (!s.alive) throw std::logic_error("invariant: dead subgraph in level list");
      for (int e : s.edge_ids) {
        if (!edges_[e].alive || edges_[e].sub != si) continue;
        if (edges_[e].level != static_cast<int>(l))
          throw std::logic_error("invariant: level mismatch");
        ++lvl_edges;
        ++live_seen;
      }
      // degree rule: current degree >= init/9 or 0 for unpruned vertices
      for (size_t v = 0; v < s.verts.size(); ++v) {
        if (s.pruned[v] || s.deg_init[v] == 0.0) continue;
        if (s.deg_cur[v] > 0 && s.deg_cur[v] < s.deg_init[v] / 9.0 - 1e-12)
          throw std::logic_error("invariant: degree below 1/9 of initial");
      }
      if (s.delete_calls > 0 && s.m_cnt > 7 * s.delete_calls)
        throw std::logic_error("invariant: m_cnt exceeds 7t");
    }
    if (lvl_edges != levels_[l].live_edges) throw std::logic_error("invariant: level counter");
    if (lvl_edges > (1L << (l + 1))) throw std::logic_error("invariant: level over capacity");
  }
  if (live_seen != m_live_) throw std::logic_error("invariant: live edge count");
}

}  // namespace gflow
