#include "gflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gflow::oracle {

std::vector<int> exact_heavy_set(const TwoSparseMatrix& a, const Vec& h, double eps) {
  std::vector<int> out;
  for (int r = 0; r < a.rows(); ++r)
    if (std::fabs(a.row_dot(r, h)) >= eps) out.push_back(r);
  return out;
}

std::vector<int> exact_heavy_set_scaled(const TwoSparseMatrix& a, const Vec& g, const Vec& h,
                                        double eps) {
  std::vector<int> out;
  for (int r = 0; r < a.rows(); ++r)
    if (std::fabs(g[r] * a.row_dot(r, h)) >= eps) out.push_back(r);
  return out;
}

// local Gaussian elimination; the oracle deliberately avoids kern::
static bool lu_solve(std::vector<double> m, int n, std::vector<double> rhs, double* x) {
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int k = 0; k < n; ++k) {
    int best = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(m[i * n + k]) > std::fabs(m[best * n + k])) best = i;
    if (std::fabs(m[best * n + k]) < 1e-12) return false;
    if (best != k) {
      for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[best * n + j]);
      std::swap(rhs[k], rhs[best]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      rhs[i] -= f * rhs[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= m[i * n + j] * x[j];
    x[i] = s / m[i * n + i];
  }
  return true;
}

Vec dense_leverage_scores(const Mat& a) {
  const int n = a.cols, m = a.rows;
  std::vector<double> g(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += a(k, i) * a(k, j);
      g[static_cast<size_t>(i) * n + j] = s;
    }
  // invert by n solves
  std::vector<double> inv(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0), x(n);
    e[j] = 1.0;
    if (!lu_solve(g, n, e, x.data())) throw std::runtime_error("leverage oracle: singular gram");
    for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + j] = x[i];
  }
  Vec sig(m, 0.0);
  for (int r = 0; r < m; ++r) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (a(r, i) == 0.0) continue;
      for (int j = 0; j < n; ++j) s += a(r, i) * inv[static_cast<size_t>(i) * n + j] * a(r, j);
    }
    sig[r] = s;
  }
  return sig;
}

LpOracleResult lp_vertex_enumerate(const LpInstance& inst) {
  inst.validate();
  const int m = inst.n_rows(), n = inst.n_cols();
  LpOracleResult res;
  const double slack = 1e-7;

  if (n == 0) {
    res.feasible = true;
    res.x.resize(m);
    res.opt = 0.0;
    for (int i = 0; i < m; ++i) {
      res.x[i] = inst.c[i] >= 0.0 ? inst.l[i] : inst.u[i];
      res.opt += inst.c[i] * res.x[i];
    }
    return res;
  }
  if (m <= n) {
    // overdetermined equalities: enumerate free/lower/upper per variable and
    // keep consistent least-squares solutions (tiny m only)
    if (m > 12) throw std::invalid_argument("lp_vertex_enumerate: m <= n path too large");
    double best = 1e300;
    Vec bestx;
    std::vector<int> state(m, 0);  // 0 free, 1 lower, 2 upper
    const long total = static_cast<long>(std::pow(3.0, m));
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < m; ++i) {
        state[i] = c % 3;
        c /= 3;
      }
      std::vector<int> freev;
      Vec x(m);
      for (int i = 0; i < m; ++i) {
        if (state[i] == 0) freev.push_back(i);
        else x[i] = state[i] == 1 ? inst.l[i] : inst.u[i];
      }
      const int k = static_cast<int>(freev.size());
      Vec rhs(inst.b);
      for (int i = 0; i < m; ++i) {
        if (state[i] == 0) continue;
        const TsEntry* e = inst.a.row(i);
        for (int t = 0; t < inst.a.row_nnz(i); ++t) rhs[e[t].col] -= e[t].val * x[i];
      }
      bool ok = true;
      if (k > 0) {
        // normal equations of the n x k system
        std::vector<double> mt(static_cast<size_t>(k) * k, 0.0);
        Vec mtb(k, 0.0);
        std::vector<Vec> cols(k, Vec(n, 0.0));
        for (int t = 0; t < k; ++t) {
          const TsEntry* e = inst.a.row(freev[t]);
          for (int q = 0; q < inst.a.row_nnz(freev[t]); ++q) cols[t][e[q].col] = e[q].val;
        }
        for (int t = 0; t < k; ++t)
          for (int u2 = 0; u2 < k; ++u2) {
            double sdot = 0.0;
            for (int j = 0; j < n; ++j) sdot += cols[t][j] * cols[u2][j];
            mt[static_cast<size_t>(t) * k + u2] = sdot;
          }
        for (int t = 0; t < k; ++t) {
          double sdot = 0.0;
          for (int j = 0; j < n; ++j) sdot += cols[t][j] * rhs[j];
          mtb[t] = sdot;
        }
        Vec xf(k);
        if (!lu_solve(mt, k, mtb, xf.data())) continue;
        for (int t = 0; t < k; ++t) {
          if (xf[t] < inst.l[freev[t]] - slack || xf[t] > inst.u[freev[t]] + slack) ok = false;
          x[freev[t]] = std::clamp(xf[t], inst.l[freev[t]], inst.u[freev[t]]);
        }
        if (!ok) continue;
        for (int t = 0; t < k; ++t)
          for (int j = 0; j < n; ++j) rhs[j] -= cols[t][j] * x[freev[t]];
      }
      double resid = 0.0;
      for (double v : rhs) resid = std::max(resid, std::fabs(v));
      if (resid > slack) continue;
      double obj = 0.0;
      for (int i = 0; i < m; ++i) obj += inst.c[i] * x[i];
      if (!res.feasible || obj < best - 1e-12) {
        res.feasible = true;
        best = obj;
        bestx = x;
      }
    }
    if (res.feasible) {
      res.opt = best;
      res.x = bestx;
    }
    return res;
  }
  const int free = m - n;
  if (free > 26) throw std::invalid_argument("lp_vertex_enumerate: instance too large");

  std::vector<int> basis(n);
  std::iota(basis.begin(), basis.end(), 0);
  double best = 1e300;
  Vec bestx;

  std::vector<double> bt(static_cast<size_t>(n) * n);
  std::vector<int> nonbasic(free);
  Vec x(m);
  while (true) {
    // columns of A_B^T are the basis rows of A
    std::fill(bt.begin(), bt.end(), 0.0);
    for (int k = 0; k < n; ++k) {
      const int r = basis[k];
      const TsEntry* e = inst.a.row(r);
      for (int t = 0; t < inst.a.row_nnz(r); ++t) bt[static_cast<size_t>(e[t].col) * n + k] = e[t].val;
    }
    {
      int idx = 0;
      for (int r = 0, k = 0; r < m; ++r) {
        if (k < n && basis[k] == r) {
          ++k;
          continue;
        }
        nonbasic[idx++] = r;
      }
    }
    for (uint64_t pat = 0; pat < (1ull << free); ++pat) {
      Vec rhs(inst.b);
      for (int t = 0; t < free; ++t) {
        const int r = nonbasic[t];
        const double xv = (pat >> t & 1) ? inst.u[r] : inst.l[r];
        x[r] = xv;
        const TsEntry* e = inst.a.row(r);
        for (int q = 0; q < inst.a.row_nnz(r); ++q) rhs[e[q].col] -= e[q].val * xv;
      }
      Vec xb(n);
      if (!lu_solve(bt, n, rhs, xb.data())) break;  // singular basis: same for all patterns
      bool ok = true;
      for (int k = 0; k < n && ok; ++k) {
        const int r = basis[k];
        if (xb[k] < inst.l[r] - slack || xb[k] > inst.u[r] + slack) ok = false;
      }
      if (!ok) continue;
      for (int k = 0; k < n; ++k)
        x[basis[k]] = std::clamp(xb[k], inst.l[basis[k]], inst.u[basis[k]]);
      double obj = 0.0;
      for (int r = 0; r < m; ++r) obj += inst.c[r] * x[r];
      if (!res.feasible || obj < best - 1e-12) {
        res.feasible = true;
        best = obj;
        bestx = x;
      }
    }
    // next lexicographic basis
    int i = n - 1;
    while (i >= 0 && basis[i] == m - n + i) --i;
    if (i < 0) break;
    ++basis[i];
    for (int j = i + 1; j < n; ++j) basis[j] = basis[j - 1] + 1;
  }
  if (res.feasible) {
    res.opt = best;
    res.x = bestx;
  }
  return res;
}

// Bounded-variable primal simplex with Bland's rule; two phases.
namespace {

struct Tableau {
  int n, total;                 // constraints, columns
  std::vector<double> col;      // dense columns, n each
  Vec cost, lo, hi, x;
  std::vector<int> basis;       // size n: column basic in row i
  std::vector<int8_t> at_upper; // nonbasic rest position
  std::vector<int8_t> is_basic;

  double colv(int j, int i) const { return col[static_cast<size_t>(j) * n + i]; }
};

bool simplex_iterate(Tableau& t, int max_iters) {
  const double tol = 1e-9;
  for (int iter = 0; iter < max_iters; ++iter) {
    // B^{-1} fresh each iteration (desk sizes)
    std::vector<double> b(static_cast<size_t>(t.n) * t.n, 0.0);
    for (int i = 0; i < t.n; ++i)
      for (int r = 0; r < t.n; ++r) b[static_cast<size_t>(r) * t.n + i] = t.colv(t.basis[i], r);
    // y solves B^T y = c_B
    std::vector<double> bt(static_cast<size_t>(t.n) * t.n);
    for (int i = 0; i < t.n; ++i)
      for (int j = 0; j < t.n; ++j) bt[static_cast<size_t>(i) * t.n + j] = b[static_cast<size_t>(j) * t.n + i];
    Vec cb(t.n), y(t.n);
    for (int i = 0; i < t.n; ++i) cb[i] = t.cost[t.basis[i]];
    if (!lu_solve(bt, t.n, cb, y.data())) return false;

    int enter = -1;
    bool from_upper = false;
    for (int j = 0; j < t.total; ++j) {
      if (t.is_basic[j]) continue;
      double d = t.cost[j];
      for (int r = 0; r < t.n; ++r) d -= y[r] * t.colv(j, r);
      if (!t.at_upper[j] && d < -tol) {
        enter = j;
        from_upper = false;
        break;  // Bland: first improving index
      }
      if (t.at_upper[j] && d > tol) {
        enter = j;
        from_upper = true;
        break;
      }
    }
    if (enter < 0) return true;  // optimal

    // direction: x_enter moves by +delta (from lower) or -delta (from upper);
    // basic vars move by -B^{-1} a_enter * (+-delta)
    Vec ae(t.n), w(t.n);
    for (int r = 0; r < t.n; ++r) ae[r] = t.colv(enter, r);
    if (!lu_solve(b, t.n, ae, w.data())) return false;
    const double dirsign = from_upper ? -1.0 : 1.0;

    double limit = t.hi[enter] - t.lo[enter];  // bound flip distance
    int leave = -1;
    bool leave_to_upper = false;
    for (int i = 0; i < t.n; ++i) {
      const double rate = -dirsign * w[i];  // dx_basic_i per unit delta
      const int bi = t.basis[i];
      double room;
      bool to_upper;
      if (rate > tol) {
        room = (t.hi[bi] - t.x[bi]) / rate;
        to_upper = true;
      } else if (rate < -tol) {
        room = (t.lo[bi] - t.x[bi]) / rate;
        to_upper = false;
      } else {
        continue;
      }
      room = std::max(room, 0.0);
      if (room < limit - 1e-12) {
        limit = room;
        leave = i;
        leave_to_upper = to_upper;
      } else if (room <= limit + 1e-12 && leave >= 0 && bi < t.basis[leave]) {
        // Bland tie-break on the leaving variable index
        leave = i;
        leave_to_upper = to_upper;
      }
    }
    if (limit >= 1e29) return false;  // unbounded; cannot happen with finite boxes

    // apply the move
    t.x[enter] += dirsign * limit;
    for (int i = 0; i < t.n; ++i) t.x[t.basis[i]] -= dirsign * limit * w[i];
    if (leave < 0) {
      t.at_upper[enter] = static_cast<int8_t>(!from_upper);  // bound flip
    } else {
      const int out = t.basis[leave];
      t.is_basic[out] = 0;
      t.at_upper[out] = leave_to_upper ? 1 : 0;
      t.x[out] = leave_to_upper ? t.hi[out] : t.lo[out];
      t.basis[leave] = enter;
      t.is_basic[enter] = 1;
      t.at_upper[enter] = 0;
    }
  }
  throw std::runtime_error("simplex: iteration cap");
}

}  // namespace

LpOracleResult lp_simplex(const LpInstance& inst) {
  inst.validate();
  const int m = inst.n_rows(), n = inst.n_cols();
  LpOracleResult res;
  if (n == 0) return lp_vertex_enumerate(inst);

  Tableau t;
  t.n = n;
  t.total = m + n;
  t.col.assign(static_cast<size_t>(t.total) * n, 0.0);
  t.cost.assign(t.total, 0.0);
  t.lo.resize(t.total);
  t.hi.resize(t.total);
  t.x.resize(t.total);
  t.at_upper.assign(t.total, 0);
  t.is_basic.assign(t.total, 0);
  for (int r = 0; r < m; ++r) {
    const TsEntry* e = inst.a.row(r);
    for (int k = 0; k < inst.a.row_nnz(r); ++k) t.col[static_cast<size_t>(r) * n + e[k].col] = e[k].val;
    t.lo[r] = inst.l[r];
    t.hi[r] = inst.u[r];
    t.x[r] = inst.l[r];
  }
  Vec resid(inst.b);
  for (int r = 0; r < m; ++r) {
    const TsEntry* e = inst.a.row(r);
    for (int k = 0; k < inst.a.row_nnz(r); ++k) resid[e[k].col] -= e[k].val * t.x[r];
  }
  for (int j = 0; j < n; ++j) {
    const int cidx = m + j;
    t.col[static_cast<size_t>(cidx) * n + j] = resid[j] >= 0.0 ? 1.0 : -1.0;
    t.lo[cidx] = 0.0;
    t.hi[cidx] = 1e30;
    t.x[cidx] = std::fabs(resid[j]);
    t.cost[cidx] = 1.0;  // phase 1
    t.basis.push_back(cidx);
    t.is_basic[cidx] = 1;
  }
  if (!simplex_iterate(t, 200000)) return res;
  double art = 0.0;
  for (int j = 0; j < n; ++j) art += t.x[m + j];
  if (art > 1e-7) return res;  // infeasible

  // phase 2: lock artificials (they can only shrink), restore costs
  for (int j = 0; j < n; ++j) {
    t.cost[m + j] = 0.0;
    t.hi[m + j] = t.x[m + j];
  }
  for (int r = 0; r < m; ++r) t.cost[r] = inst.c[r];
  if (!simplex_iterate(t, 200000)) return res;

  res.feasible = true;
  res.x.assign(t.x.begin(), t.x.begin() + m);
  res.opt = 0.0;
  for (int r = 0; r < m; ++r) res.opt += inst.c[r] * res.x[r];
  return res;
}

}  // namespace gflow::oracle
