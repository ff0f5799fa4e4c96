#include "gflow/lossy_graph.hpp"

#include <cmath>
#include <stdexcept>

namespace gflow {

void LossyGraph::validate() const {
  for (const auto& e : edges) {
    if (e.tail == e.head) throw std::invalid_argument("lossy graph: self-loop");
    if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n)
      throw std::invalid_argument("lossy graph: vertex out of range");
    if (!(e.eta >= 1.0)) throw std::invalid_argument("lossy graph: multiplier below 1");
    if (!(e.weight > 0.0)) throw std::invalid_argument("lossy graph: nonpositive weight");
  }
}

double LossyGraph::beta() const {
  double b = 0.0;
  for (const auto& e : edges) b = std::max(b, e.eta - 1.0);
  return b;
}

bool LossyGraph::unit_weights() const {
  for (const auto& e : edges)
    if (e.weight != 1.0) return false;
  return true;
}

bool LossyGraph::connected() const {
  if (n == 0) return false;
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) {
    adj[e.tail].push_back(e.head);
    adj[e.head].push_back(e.tail);
  }
  std::vector<int> stack{0};
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  int cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++cnt;
        stack.push_back(w);
      }
  }
  return cnt == n;
}

GammaIngest from_gamma(int n, const std::vector<LossyEdge>& gamma_edges) {
  GammaIngest out;
  out.graph.n = n;
  for (const auto& ge : gamma_edges) {
    const double gamma = ge.eta;  // gamma carried in the eta slot on input
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (ge.tail == ge.head) throw std::invalid_argument("self-loop");
    LossyEdge e;
    if (gamma <= 1.0) {
      // gamma*1_head - 1_tail = gamma * (1_head - (1/gamma) 1_tail)
      e = {ge.tail, ge.head, 1.0 / gamma, ge.weight};
      out.row_scale.push_back(gamma);
      out.row_sign.push_back(1);
      out.flipped.push_back(0);
    } else {
      // gamma*1_head - 1_tail = -(1_tail - gamma 1_head): swap orientation
      e = {ge.head, ge.tail, gamma, ge.weight};
      out.row_scale.push_back(1.0);
      out.row_sign.push_back(-1);
      out.flipped.push_back(1);
    }
    out.graph.edges.push_back(e);
  }
  out.graph.validate();
  return out;
}

LaplacianView build_incidence(const LossyGraph& g) {
  g.validate();
  LaplacianView v;
  v.g = &g;
  v.d_lossy.assign(g.n, 0.0);
  v.d_smooth.assign(g.n, 0.0);
  for (const auto& e : g.edges) {
    v.d_lossy[e.head] += e.weight;
    v.d_lossy[e.tail] += e.weight * e.eta * e.eta;
    v.d_smooth[e.head] += e.weight;
    v.d_smooth[e.tail] += e.weight;
  }
  for (int i = 0; i < g.n; ++i) {
    if (v.d_smooth[i] == 0.0) {
      v.degenerate_degree = true;
      v.isolated.push_back(i);
    }
  }
  return v;
}

Mat LaplacianView::incidence() const {
  Mat b(g->m(), g->n);
  for (int e = 0; e < g->m(); ++e) {
    b(e, g->edges[e].head) += 1.0;
    b(e, g->edges[e].tail) -= g->edges[e].eta;
  }
  return b;
}

static Mat laplacian_of(const LossyGraph& g, bool smoothed) {
  Mat l(g.n, g.n);
  for (const auto& e : g.edges) {
    const double eta = smoothed ? 1.0 : e.eta;
    l(e.head, e.head) += e.weight;
    l(e.tail, e.tail) += e.weight * eta * eta;
    l(e.head, e.tail) -= e.weight * eta;
    l(e.tail, e.head) -= e.weight * eta;
  }
  return l;
}

Mat LaplacianView::laplacian() const { return laplacian_of(*g, false); }
Mat LaplacianView::laplacian_smooth() const { return laplacian_of(*g, true); }

static Mat normalize(const Mat& l, const Vec& d) {
  Mat n = l;
  const int sz = l.rows;
  Vec inv(sz);
  for (int i = 0; i < sz; ++i) inv[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  for (int i = 0; i < sz; ++i)
    for (int j = 0; j < sz; ++j) n(i, j) *= inv[i] * inv[j];
  return n;
}

Mat LaplacianView::normalized() const { return normalize(laplacian(), d_lossy); }
Mat LaplacianView::normalized_smooth() const { return normalize(laplacian_smooth(), d_smooth); }

void LaplacianView::apply_shifted_normalized(const Vec& d, double eps_ad, const double* x,
                                             double* y) const {
  const int n = g->n;
  for (int i = 0; i < n; ++i) y[i] = eps_ad * x[i];
  for (const auto& e : g->edges) {
    const double xa = d[e.tail] > 0.0 ? x[e.tail] / std::sqrt(d[e.tail]) : 0.0;
    const double xb = d[e.head] > 0.0 ? x[e.head] / std::sqrt(d[e.head]) : 0.0;
    const double r = e.weight * (xb - e.eta * xa);
    if (d[e.head] > 0.0) y[e.head] += r / std::sqrt(d[e.head]);
    if (d[e.tail] > 0.0) y[e.tail] -= e.eta * r / std::sqrt(d[e.tail]);
  }
}

double LaplacianView::shifted_rayleigh(const Vec& d, double eps_ad, const Vec& v) const {
  double s = 0.0, nv = 0.0;
  for (int i = 0; i < g->n; ++i) nv += v[i] * v[i];
  for (const auto& e : g->edges) {
    const double xa = d[e.tail] > 0.0 ? v[e.tail] / std::sqrt(d[e.tail]) : 0.0;
    const double xb = d[e.head] > 0.0 ? v[e.head] / std::sqrt(d[e.head]) : 0.0;
    const double r = xb - e.eta * xa;
    s += e.weight * r * r;
  }
  return s + eps_ad * nv;
}

Vec imbalance(const LossyGraph& g, const Vec& f) {
  if (static_cast<int>(f.size()) != g.m())
    throw std::invalid_argument("imbalance: flow length mismatch");
  Vec im(g.n, 0.0);
  for (int e = 0; e < g.m(); ++e) {
    im[g.edges[e].head] += f[e];
    im[g.edges[e].tail] -= g.edges[e].eta * f[e];
  }
  return im;
}

int TwoSparseMatrix::add_row(std::span<const TsEntry> entries) {
  TsEntry merged[2];
  int cnt = 0;
  for (const auto& in : entries) {
    if (in.val == 0.0) continue;
    if (in.col < 0 || in.col >= cols_) throw std::invalid_argument("two-sparse: column out of range");
    bool found = false;
    for (int k = 0; k < cnt; ++k)
      if (merged[k].col == in.col) {
        merged[k].val += in.val;
        found = true;
        break;
      }
    if (found) continue;
    if (cnt == 2) throw std::invalid_argument("two-sparse: more than two nonzeros in a row");
    merged[cnt++] = in;
  }
  // a merge may have cancelled to zero
  int out = 0;
  TsEntry fin[2];
  for (int k = 0; k < cnt; ++k)
    if (merged[k].val != 0.0) fin[out++] = merged[k];
  ent_.push_back(out > 0 ? fin[0] : TsEntry{});
  ent_.push_back(out > 1 ? fin[1] : TsEntry{});
  nnz_.push_back(static_cast<int8_t>(out));
  return rows() - 1;
}

Vec TwoSparseMatrix::matvec(const Vec& h) const {
  if (static_cast<int>(h.size()) != cols_) throw std::invalid_argument("matvec: length mismatch");
  Vec y(rows(), 0.0);
#pragma omp parallel for schedule(static) if (rows() > 4096)
  for (long long r = 0; r < rows(); ++r) {
    const TsEntry* e = row(static_cast<int>(r));
    double s = 0.0;
    for (int k = 0; k < nnz_[r]; ++k) s += e[k].val * h[e[k].col];
    y[r] = s;
  }
  return y;
}

Vec TwoSparseMatrix::matvec_t(const Vec& y) const {
  if (static_cast<int>(y.size()) != rows()) throw std::invalid_argument("matvec_t: length mismatch");
  Vec x(cols_, 0.0);
  for (int r = 0; r < rows(); ++r) {
    const TsEntry* e = row(r);
    for (int k = 0; k < nnz_[r]; ++k) x[e[k].col] += e[k].val * y[r];
  }
  return x;
}

double TwoSparseMatrix::row_dot(int r, const Vec& h) const {
  const TsEntry* e = row(r);
  double s = 0.0;
  for (int k = 0; k < nnz_[r]; ++k) s += e[k].val * h[e[k].col];
  return s;
}

double TwoSparseMatrix::magnitude_bound() const {
  double w = 1.0;
  for (int r = 0; r < rows(); ++r) {
    const TsEntry* e = row(r);
    for (int k = 0; k < nnz_[r]; ++k) {
      const double a = std::fabs(e[k].val);
      w = std::max({w, a, 1.0 / a});
    }
  }
  return w;
}

Mat TwoSparseMatrix::gram(const Vec& w) const {
  Mat g(cols_, cols_);
  for (int r = 0; r < rows(); ++r) {
    const double wr = w.empty() ? 1.0 : w[r];
    const TsEntry* e = row(r);
    for (int a = 0; a < nnz_[r]; ++a)
      for (int b = 0; b < nnz_[r]; ++b) g(e[a].col, e[b].col) += wr * e[a].val * e[b].val;
  }
  return g;
}

Mat TwoSparseMatrix::dense() const {
  Mat d(rows(), cols_);
  for (int r = 0; r < rows(); ++r) {
    const TsEntry* e = row(r);
    for (int k = 0; k < nnz_[r]; ++k) d(r, e[k].col) += e[k].val;
  }
  return d;
}

}  // namespace gflow
