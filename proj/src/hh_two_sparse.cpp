#include "gflow/hh_two_sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gflow {

ReducedRow reduce_two_sparse_row(const TsEntry* ent, int nnz, int n) {
  if (nnz <= 0) throw std::invalid_argument("two_sparse_reduce: zero row");
  // build the intermediate row with one positive entry p and one negative q
  int p, qv;
  double a, b;  // values at p (positive) and q (negative magnitude)
  if (nnz == 1) {
    const double alpha = ent[0].val;
    if (alpha > 0.0) {
      p = ent[0].col;
      qv = n + ent[0].col;
      a = alpha / 2.0;
      b = alpha / 2.0;
    } else {
      p = n + ent[0].col;
      qv = ent[0].col;
      a = -alpha / 2.0;
      b = -alpha / 2.0;
    }
  } else {
    const double x = ent[0].val, y = ent[1].val;
    if (x > 0.0 && y < 0.0) {
      p = ent[0].col;
      qv = ent[1].col;
      a = x;
      b = -y;
    } else if (x < 0.0 && y > 0.0) {
      p = ent[1].col;
      qv = ent[0].col;
      a = y;
      b = -x;
    } else if (x > 0.0 && y > 0.0) {
      // same sign: second entry moves to the mirrored column
      p = ent[0].col;
      qv = n + ent[1].col;
      a = x;
      b = y;
    } else {
      p = n + ent[1].col;
      qv = ent[0].col;
      a = -y;
      b = -x;
    }
  }
  // row = a 1_p - b 1_q; normalize so the head coefficient is 1
  ReducedRow r;
  if (b >= a) {
    r.g = a;
    r.sign = 1;
    r.eta = b / a;
    r.head = p;
    r.tail = qv;
  } else {
    r.g = b;
    r.sign = -1;
    r.eta = a / b;
    r.head = qv;
    r.tail = p;
  }
  return r;
}

TwoSparseReduction two_sparse_reduce(const TwoSparseMatrix& a) {
  TwoSparseReduction red;
  red.n = a.cols();
  for (int r = 0; r < a.rows(); ++r)
    red.rows.push_back(reduce_two_sparse_row(a.row(r), a.row_nnz(r), a.cols()));
  return red;
}

TwoSparseHh::TwoSparseHh(int n_cols, Config cfg)
    : n_(n_cols), cfg_(cfg), rng_(cfg.general.seed ^ 0x715a) {
  gen_ = std::make_unique<GeneralLossyHh>(2 * n_cols, cfg.general);
}

int TwoSparseHh::insert(const TsEntry* ent, int nnz) {
  const ReducedRow red = reduce_two_sparse_row(ent, nnz, n_);
  const int id = gen_->insert(red.tail, red.head, red.eta, red.g, 0.0, red.sign);
  if (id != static_cast<int>(rows_.size()))
    throw std::logic_error("two-sparse hh: id drift between layers");
  rows_.push_back({red, 1.0, true});
  return id;
}

void TwoSparseHh::del(int i) {
  if (!row_alive(i)) throw std::invalid_argument("two-sparse hh: delete of unknown row");
  gen_->del(i);
  rows_[i].alive = false;
}

void TwoSparseHh::scale(int i, double b) {
  if (!row_alive(i)) throw std::invalid_argument("two-sparse hh: scale of unknown row");
  if (b == 0.0) throw std::invalid_argument("two-sparse hh: zero row scale");
  rows_[i].scale = b;
  gen_->scale(i, std::fabs(b) * rows_[i].red.g);
}

void TwoSparseHh::scale_tau(int i, double b) {
  if (!row_alive(i)) throw std::invalid_argument("two-sparse hh: scale_tau of unknown row");
  gen_->scale_tau(i, b);
}

bool TwoSparseHh::row_alive(int i) const {
  return i >= 0 && i < static_cast<int>(rows_.size()) && rows_[i].alive;
}

Vec TwoSparseHh::doubled(const Vec& h) const {
  Vec hh(2 * n_);
  for (int i = 0; i < n_; ++i) {
    hh[i] = h[i];
    hh[n_ + i] = -h[i];
  }
  return hh;
}

double TwoSparseHh::row_value(int i, const Vec& h) const {
  const RowRec& r = rows_[i];
  const auto val = [&](int v) { return v < n_ ? h[v] : -h[v - n_]; };
  return r.scale * r.red.sign * r.red.g * (val(r.red.head) - r.red.eta * val(r.red.tail));
}

std::vector<int> TwoSparseHh::query_heavy(const Vec& h, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("two-sparse hh: eps must lie in (0,1)");
  if (static_cast<int>(h.size()) != n_) throw std::invalid_argument("two-sparse hh: h length");
  return gen_->query_heavy(doubled(h), eps);
}

double TwoSparseHh::norm_estimate(const Vec& h) { return gen_->norm_estimate(doubled(h)); }

std::pair<Vec, double> TwoSparseHh::sample_weights(const Vec& h) {
  return gen_->sample_weights(doubled(h), cfg_.c1, cfg_.c2, cfg_.c3);
}

TwoSparseHh::SampleResult TwoSparseHh::sample(const Vec& h) {
  SampleResult out;
  auto [q, qsum] = sample_weights(h);
  out.q_sum = qsum;
  // rows with q >= 1 are included deterministically; the rest are drawn
  // proportionally to q with importance weights, keeping E[R] = I exactly
  double s_frac = 0.0;
  std::vector<int> frac_rows;
  for (int i = 0; i < static_cast<int>(q.size()); ++i) {
    if (q[i] <= 0.0) continue;
    if (q[i] >= 1.0) {
      out.r.push_back({i, 1.0});
      ++out.deterministic;
    } else {
      frac_rows.push_back(i);
      s_frac += q[i];
    }
  }
  if (s_frac > 0.0) {
    Vec prefix(frac_rows.size());
    double acc = 0.0;
    for (size_t k = 0; k < frac_rows.size(); ++k) {
      acc += q[frac_rows[k]];
      prefix[k] = acc;
    }
    const long draws = std::max<long>(1, static_cast<long>(std::ceil(cfg_.c0 * s_frac)));
    out.draws = draws;
    std::vector<double> w(frac_rows.size(), 0.0);
    const double per_draw = s_frac / static_cast<double>(draws);
    for (long j = 0; j < draws; ++j) {
      const double r = rng_.uniform() * s_frac;
      const auto it = std::upper_bound(prefix.begin(), prefix.end(), r);
      const size_t k = std::min<size_t>(it - prefix.begin(), frac_rows.size() - 1);
      w[k] += per_draw / q[frac_rows[k]];
    }
    for (size_t k = 0; k < frac_rows.size(); ++k)
      if (w[k] != 0.0) out.r.push_back({frac_rows[k], w[k]});
  }
  std::sort(out.r.begin(), out.r.end());
  return out;
}

}  // namespace gflow
