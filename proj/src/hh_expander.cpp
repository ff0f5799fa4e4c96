#include "gflow/hh_expander.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gflow/spectral.hpp"

namespace gflow {

ExpanderHh::ExpanderHh(const LossyGraph& g, Config cfg, Vec tau_bar)
    : g_(g), cfg_(cfg), rng_(cfg.seed) {
  g_.validate();
  if (!g_.unit_weights())
    throw std::invalid_argument("expander hh: weighted graphs are handled a level up");
  for (double t : tau_bar)
    if (t < 0.0) throw std::invalid_argument("expander hh: tau_bar must be nonnegative");
  if (static_cast<int>(tau_bar.size()) != g_.m())
    throw std::invalid_argument("expander hh: tau_bar length");
  const double beta = g_.beta();
  if (beta > 0.5) throw std::invalid_argument("expander hh: graph is not balanced (beta > 0.5)");
  const double l2lb = cfg_.lambda2_smooth_lb > 0.0 ? cfg_.lambda2_smooth_lb
                                                   : cfg_.phi * cfg_.phi / 2.0;
  // hard theory precondition behind Thm 3.1: lambda_2(N_bar) >= 20 beta
  if (beta > l2lb / 20.0)
    throw std::invalid_argument("expander hh: beta exceeds lambda2/20, sandwich breaks");
  if (cfg_.strict_preconditions) {
    const double lm = std::log(std::max(2.0, static_cast<double>(g_.m())));
    const double cap = cfg_.phi * cfg_.phi / (1e5 * lm * lm);
    if (beta > cap || cfg_.eps_ad > cap)
      throw std::invalid_argument("expander hh: beta/eps_ad exceed the strict bound");
  }

  const int n = g_.n, m = g_.m();
  degree_init_.assign(n, 0.0);
  adj_.assign(n, {});
  epos_.assign(m, {-1, -1});
  alive_edge_.assign(m, 1);
  alive_vertex_.assign(n, 1);
  deg_cur_.assign(n, 0);
  live_pos_.assign(m, -1);
  for (int e = 0; e < m; ++e) {
    const auto& ed = g_.edges[e];
    degree_init_[ed.tail] += 1.0;
    degree_init_[ed.head] += 1.0;
    epos_[e].first = static_cast<int>(adj_[ed.tail].size());
    adj_[ed.tail].push_back(e);
    epos_[e].second = static_cast<int>(adj_[ed.head].size());
    adj_[ed.head].push_back(e);
    deg_cur_[ed.tail]++;
    deg_cur_[ed.head]++;
    live_pos_[e] = static_cast<int>(live_edges_.size());
    live_edges_.push_back(e);
  }
  m_live_ = m;
  n_live_ = 0;
  for (int i = 0; i < n; ++i) {
    if (deg_cur_[i] == 0) alive_vertex_[i] = 0;
    else ++n_live_;
  }
  fen_tau_ = Fenwick(m);
  for (int e = 0; e < m; ++e) fen_tau_.set(e, tau_bar[e]);
  fen_u2_ = Fenwick(m);
  mark_.assign(m, -1);
  reset();
}

double ExpanderHh::row_value(int e, const Vec& h) const {
  const auto& ed = g_.edges[e];
  return h[ed.head] - ed.eta * h[ed.tail];
}

double ExpanderHh::current_rayleigh() const {
  // v^T (D^{-1/2} L D^{-1/2} + eps_ad I) v on the live graph
  double s = cfg_.eps_ad;  // v is unit
  for (int e : live_edges_) {
    const auto& ed = g_.edges[e];
    const double va = v0_[ed.tail] * v_scale_ / std::sqrt(degree_init_[ed.tail]);
    const double vb = v0_[ed.head] * v_scale_ / std::sqrt(degree_init_[ed.head]);
    const double r = vb - ed.eta * va;
    s += r * r;
  }
  return s;
}

void ExpanderHh::reset() {
  ++reset_epoch_;
  if (m_live_ == 0) {
    v0_.assign(g_.n, 0.0);
    v_scale_ = 1.0;
    v_norm2_ = 0.0;
    u0_.assign(g_.m(), 0.0);
    u_scale_ = 1.0;
    sorted_u_.clear();
    fen_u2_ = Fenwick(g_.m());
    m_at_reset_ = 0;
    ray_at_reset_ = cfg_.eps_ad;
    return;
  }
  // eigensolve on the live graph with compacted vertex ids so dead
  // coordinates cannot attract the power iteration
  std::vector<int> vid(g_.n, -1), rev;
  for (int i = 0; i < g_.n; ++i)
    if (alive_vertex_[i]) {
      vid[i] = static_cast<int>(rev.size());
      rev.push_back(i);
    }
  LossyGraph cur;
  cur.n = static_cast<int>(rev.size());
  for (int e : live_edges_) {
    const auto& ed = g_.edges[e];
    cur.edges.push_back({vid[ed.tail], vid[ed.head], ed.eta, 1.0});
  }
  Vec dloc(cur.n);
  for (int k = 0; k < cur.n; ++k) dloc[k] = degree_init_[rev[k]];
  const auto view = build_incidence(cur);
  const double l2lb = cfg_.lambda2_smooth_lb > 0.0 ? cfg_.lambda2_smooth_lb
                                                   : cfg_.phi * cfg_.phi / 2.0;
  auto eig = least_eigvec(view, dloc, cfg_.eps_ad, l2lb,
                          rng_.raw() ^ splitmix64(reset_epoch_));
  v0_.assign(g_.n, 0.0);
  for (int k = 0; k < cur.n; ++k) v0_[rev[k]] = eig.v[k];
  v_scale_ = 1.0;
  v_norm2_ = 1.0;

  u0_.assign(g_.m(), 0.0);
  u_scale_ = 1.0;
  fen_u2_ = Fenwick(g_.m());
  sorted_u_.clear();
  for (int e : live_edges_) {
    const auto& ed = g_.edges[e];
    const double u = v0_[ed.head] / std::sqrt(degree_init_[ed.head]) -
                     ed.eta * v0_[ed.tail] / std::sqrt(degree_init_[ed.tail]);
    u0_[e] = u;
    fen_u2_.set(e, u * u);
    sorted_u_.push_back({std::fabs(u), e});
  }
  std::sort(sorted_u_.begin(), sorted_u_.end(),
            [](const auto& a, const auto& b) {
              return a.first != b.first ? a.first > b.first : a.second < b.second;
            });

  jl_.k = JlSketch::dimension(m_live_, std::max(2, n_live_));
  jl_.epoch_seed = splitmix64(cfg_.seed ^ splitmix64(0x51e7c9u + reset_epoch_));
  m_sketch_ = Mat(jl_.k, g_.n);
  Vec col(jl_.k);
  for (int e : live_edges_) {
    const auto& ed = g_.edges[e];
    jl_.column(e, col.data());
    double* base = m_sketch_.a.data();
    for (int r = 0; r < jl_.k; ++r) {
      base[static_cast<size_t>(r) * g_.n + ed.head] += col[r];
      base[static_cast<size_t>(r) * g_.n + ed.tail] -= ed.eta * col[r];
    }
  }

  m_at_reset_ = m_live_;
  ray_at_reset_ = current_rayleigh();
}

void ExpanderHh::remove_edge(int e) {
  const auto& ed = g_.edges[e];
  alive_edge_[e] = 0;
  fen_u2_.set(e, 0.0);
  fen_tau_.set(e, 0.0);
  auto drop = [&](int v, int pos) {
    auto& list = adj_[v];
    const int last = list.back();
    list[pos] = last;
    if (g_.edges[last].tail == v) epos_[last].first = pos;
    if (g_.edges[last].head == v) epos_[last].second = pos;
    list.pop_back();
  };
  drop(ed.tail, epos_[e].first);
  drop(ed.head, epos_[e].second);
  deg_cur_[ed.tail]--;
  deg_cur_[ed.head]--;
  const int lp = live_pos_[e];
  const int last = live_edges_.back();
  live_edges_[lp] = last;
  live_pos_[last] = lp;
  live_edges_.pop_back();
  live_pos_[e] = -1;
  --m_live_;
}

void ExpanderHh::del(const std::vector<int>& f) {
  ++stats_.deletes;
  if (f.empty()) return;
  ++mark_epoch_;
  for (int e : f) {
    if (e < 0 || e >= g_.m() || !alive_edge_[e] || mark_[e] == mark_epoch_)
      throw std::invalid_argument("expander hh: delete of unknown, dead or duplicate edge");
    mark_[e] = mark_epoch_;
  }

  // M <- M - J_{:,F} (B_G)_{F,:}
  Vec col(jl_.k);
  for (int e : f) {
    const auto& ed = g_.edges[e];
    jl_.column(e, col.data());
    double* base = m_sketch_.a.data();
    for (int r = 0; r < jl_.k; ++r) {
      base[static_cast<size_t>(r) * g_.n + ed.head] -= col[r];
      base[static_cast<size_t>(r) * g_.n + ed.tail] += ed.eta * col[r];
    }
  }
  for (int e : f) remove_edge(e);

  // drop isolated vertices and renormalize v
  double removed = 0.0;
  for (int e : f) {
    for (int v : {g_.edges[e].tail, g_.edges[e].head}) {
      if (alive_vertex_[v] && deg_cur_[v] == 0) {
        alive_vertex_[v] = 0;
        --n_live_;
        removed += v0_[v] * v0_[v];
        v0_[v] = 0.0;
      }
    }
  }
  if (removed > 0.0 && v_norm2_ > removed) {
    const double r2 = (v_norm2_ - removed) / v_norm2_;
    const double r = std::sqrt(r2);
    v_norm2_ -= removed;
    v_scale_ /= r;
    u_scale_ /= r;
  } else if (removed > 0.0) {
    v_norm2_ = 0.0;
  }

  check_renormalization();

  if (m_live_ * 2 <= m_at_reset_ && m_live_ >= 0) {
    ++stats_.resets_delete;
    reset();
  }
}

void ExpanderHh::check_renormalization() {
  if (m_live_ == 0) return;
  const double ray = current_rayleigh();
  if (ray > 3.0 * ray_at_reset_ * (1.0 + 1e-9)) ++stats_.renorm_violations;
}

void ExpanderHh::scale_tau(int e, double b) {
  if (e < 0 || e >= g_.m() || !alive_edge_[e])
    throw std::invalid_argument("expander hh: scale_tau on dead edge");
  if (b < 0.0) throw std::invalid_argument("expander hh: tau must be nonnegative");
  fen_tau_.set(e, b);
}

ExpanderHh::QueryState ExpanderHh::preamble(const Vec& h, bool* did_reset) {
  if (static_cast<int>(h.size()) != g_.n)
    throw std::invalid_argument("expander hh: query vector length");
  QueryState q;
  auto build = [&]() {
    q.g.assign(g_.n, 0.0);
    q.vtg = 0.0;
    for (int i = 0; i < g_.n; ++i) {
      if (!alive_vertex_[i]) continue;
      q.g[i] = std::sqrt(degree_init_[i]) * h[i];
      q.vtg += v0_[i] * v_scale_ * q.g[i];
    }
    q.gperp = q.g;
    q.gperp_nsq = 0.0;
    for (int i = 0; i < g_.n; ++i) {
      if (!alive_vertex_[i]) continue;
      q.gperp[i] -= q.vtg * v0_[i] * v_scale_;
      q.gperp_nsq += q.gperp[i] * q.gperp[i];
    }
    q.gv_norm = std::fabs(q.vtg);
  };
  auto jl_t = [&]() {
    // t = phi^-4 (||M h||^2 + eps_ad ||D^{1/2} h||^2)
    double mh2 = 0.0;
    for (int r = 0; r < jl_.k; ++r) {
      const double* row = m_sketch_.row(r);
      double s = 0.0;
      for (int i = 0; i < g_.n; ++i)
        if (alive_vertex_[i]) s += row[i] * h[i];
      mh2 += s * s;
    }
    double dh2 = 0.0;
    for (int i = 0; i < g_.n; ++i)
      if (alive_vertex_[i]) dh2 += q.g[i] * q.g[i];
    const double p4 = std::pow(cfg_.phi, 4.0);
    if (cfg_.debug_checks) {
      ++stats_.jl_checks;
      double bh2 = 0.0;
      for (int e : live_edges_) {
        const double r = row_value(e, h);
        bh2 += r * r;
      }
      const double lo = bh2 / (1.02 * 1.02), hi = bh2 * 1.02 * 1.02;
      if (mh2 < lo - 1e-12 || mh2 > hi + 1e-12) ++stats_.jl_violations_102;
    }
    return (mh2 + cfg_.eps_ad * dh2) / p4;
  };
  build();
  q.t = jl_t();
  if (did_reset) *did_reset = false;
  if (q.gperp_nsq >= cfg_.reset_test_c * q.t && m_live_ > 0) {
    ++stats_.resets_query;
    reset();
    build();
    q.t = jl_t();
    if (did_reset) *did_reset = true;
  }
  return q;
}

std::vector<int> ExpanderHh::query_heavy(const Vec& h, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("expander hh: eps must be positive");
  ++stats_.queries;
  if (m_live_ == 0) return {};
  QueryState q = preamble(h, nullptr);

  ++mark_epoch_;
  std::vector<int> cand;
  auto push = [&](int e) {
    if (alive_edge_[e] && mark_[e] != mark_epoch_) {
      mark_[e] = mark_epoch_;
      cand.push_back(e);
    }
  };

  // S_{>= eps/2}(||g^v|| |u|) by binary search on the sorted |u0| array
  const double denom = q.gv_norm * u_scale_;
  if (denom > 0.0) {
    const double thr = (eps / 2.0) / denom;
    size_t lo = 0, hi = sorted_u_.size();
    while (lo < hi) {  // first index with |u0| < thr
      const size_t mid = (lo + hi) / 2;
      if (sorted_u_[mid].first >= thr) lo = mid + 1;
      else hi = mid;
    }
    for (size_t i = 0; i < lo; ++i) push(sorted_u_[i].second);
    stats_.candidate_work += static_cast<long>(lo);
  }
  // endpoint test on g^perp
  const double vthr = eps / cfg_.vertex_test_div;
  for (int j = 0; j < g_.n; ++j) {
    if (!alive_vertex_[j]) continue;
    if (std::fabs(q.gperp[j]) / std::sqrt(degree_init_[j]) >= vthr) {
      for (int e : adj_[j]) push(e);
      stats_.candidate_work += deg_cur_[j];
    }
  }
  // exact final filter
  std::vector<int> out;
  for (int e : cand) {
    ++stats_.filter_evals;
    if (std::fabs(row_value(e, h)) >= eps) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ExpanderHh::norm_estimate(const Vec& h) {
  if (m_live_ == 0) return 0.0;
  QueryState q = preamble(h, nullptr);
  const double u_nsq = u_scale_ * u_scale_ * fen_u2_.total();
  return 10.0 * (q.gv_norm * q.gv_norm * u_nsq + q.gperp_nsq);
}

std::pair<Vec, double> ExpanderHh::sample_weights(const Vec& h, double c1b, double c2b,
                                                  double c3) {
  Vec q(g_.m(), 0.0);
  if (m_live_ == 0) return {q, 0.0};
  QueryState st = preamble(h, nullptr);
  const double gv2 = st.gv_norm * st.gv_norm;
  double s = 0.0;
  for (int e : live_edges_) {
    const auto& ed = g_.edges[e];
    const double ue = u_scale_ * u0_[e];
    const double pa = st.gperp[ed.tail] * st.gperp[ed.tail] / degree_init_[ed.tail];
    const double pb = st.gperp[ed.head] * st.gperp[ed.head] / degree_init_[ed.head];
    q[e] = 5.0 * c1b * (gv2 * ue * ue + pa + pb) + c2b + c3 * fen_tau_.value(e);
    s += q[e];
  }
  return {q, s};
}

std::vector<std::pair<int, double>> ExpanderHh::sample(const Vec& h, double c0, double c1b,
                                                       double c2b, double c3) {
  if (c0 < 0.0 || c1b < 0.0 || c2b < 0.0 || c3 < 0.0)
    throw std::invalid_argument("expander hh: negative sampling constant");
  if (m_live_ == 0) return {};
  QueryState q = preamble(h, nullptr);
  const double gv2 = q.gv_norm * q.gv_norm;
  const double u_nsq = fen_u2_.total();  // in u0 units

  const double s1 = 5.0 * c1b * gv2 * u_scale_ * u_scale_ * u_nsq;
  double s2 = 0.0;
  Vec vert_w(g_.n, 0.0);
  for (int i = 0; i < g_.n; ++i) {
    if (!alive_vertex_[i]) continue;
    vert_w[i] = 5.0 * c1b * q.gperp[i] * q.gperp[i] * deg_cur_[i] / degree_init_[i];
    s2 += vert_w[i];
  }
  const double tau_mass = c3 * fen_tau_.total();
  const double s3 = c2b * m_live_ + tau_mass;
  const double s = s1 + s2 + s3;
  if (!(s > 0.0)) return {};

  // prefix array for the vertex branch, reused by all draws
  Vec vert_prefix;
  std::vector<int> vert_ids;
  for (int i = 0; i < g_.n; ++i)
    if (vert_w[i] > 0.0) {
      vert_ids.push_back(i);
      vert_prefix.push_back((vert_prefix.empty() ? 0.0 : vert_prefix.back()) + vert_w[i]);
    }

  const long long draws = std::max<long long>(1, static_cast<long long>(std::ceil(c0 * s)));
  auto q_of = [&](int e) {
    const auto& ed = g_.edges[e];
    const double ue = u_scale_ * u0_[e];
    const double pa = q.gperp[ed.tail] * q.gperp[ed.tail] / degree_init_[ed.tail];
    const double pb = q.gperp[ed.head] * q.gperp[ed.head] / degree_init_[ed.head];
    return 5.0 * c1b * (gv2 * ue * ue + pa + pb) + c2b + c3 * fen_tau_.value(e);
  };

  std::vector<std::pair<int, double>> acc;
  std::vector<int> touched;
  ++mark_epoch_;
  std::vector<double> weight_of(g_.m(), 0.0);
  const double per_draw = s / static_cast<double>(draws);
  for (long long j = 0; j < draws; ++j) {
    ++stats_.sample_draws;
    const double r = rng_.uniform() * s;
    int e = -1;
    if (r < s1 && fen_u2_.total() > 0.0) {
      e = fen_u2_.sample(rng_.uniform() * fen_u2_.total());
    } else if (r < s1 + s2 && !vert_ids.empty()) {
      const double rv = rng_.uniform() * vert_prefix.back();
      const auto it = std::upper_bound(vert_prefix.begin(), vert_prefix.end(), rv);
      const int i = vert_ids[std::min<size_t>(it - vert_prefix.begin(), vert_ids.size() - 1)];
      e = adj_[i][rng_.index(adj_[i].size())];
    } else {
      // C2 uniform / C3 tau mixture
      const double mix = rng_.uniform() * s3;
      if (mix < c2b * m_live_ || fen_tau_.total() <= 0.0 || c3 == 0.0) {
        e = live_edges_[rng_.index(live_edges_.size())];
      } else {
        e = fen_tau_.sample(rng_.uniform() * fen_tau_.total());
      }
    }
    if (e < 0 || !alive_edge_[e]) continue;
    const double qe = q_of(e);
    if (qe <= 0.0) continue;
    if (mark_[e] != mark_epoch_) {
      mark_[e] = mark_epoch_;
      touched.push_back(e);
    }
    weight_of[e] += per_draw / qe;
  }
  for (int e : touched) acc.push_back({e, weight_of[e]});
  std::sort(acc.begin(), acc.end());
  return acc;
}

}  // namespace gflow
