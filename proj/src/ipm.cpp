#include "gflow/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "gflow/kernels.hpp"
#include "gflow/linsolve.hpp"

namespace gflow {

BarrierEval barrier_eval(const Vec& x, const Vec& l, const Vec& u) {
  const int m = static_cast<int>(x.size());
  BarrierEval out;
  out.phi.resize(m);
  out.d1.resize(m);
  out.d2.resize(m);
  for (int i = 0; i < m; ++i) {
    const double a = x[i] - l[i], b = u[i] - x[i];
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("barrier: x not strictly interior");
    out.phi[i] = -std::log(a) - std::log(b);
    out.d1[i] = -1.0 / a + 1.0 / b;
    out.d2[i] = 1.0 / (a * a) + 1.0 / (b * b);
  }
  return out;
}

ModifiedLp initialize_lp(const LpInstance& inst, double delta, double c_const) {
  inst.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("initialize_lp: delta must be positive");
  const int m = inst.n_rows(), n = inst.n_cols();
  ModifiedLp mlp;
  mlp.m_orig = m;
  mlp.n = n;
  mlp.delta = delta;
  mlp.c_const = c_const;
  const double w = std::max(inst.magnitude(), 1.0);

  Vec x_init(m);
  for (int i = 0; i < m; ++i) x_init[i] = 0.5 * (inst.l[i] + inst.u[i]);
  // resid = b - A^T x_init
  Vec resid = inst.b;
  {
    const Vec at = inst.a.matvec_t(x_init);
    for (int j = 0; j < n; ++j) resid[j] -= at[j];
  }

  double xi = 0.0;
  for (int i = 0; i < m; ++i) xi = std::max(xi, inst.u[i] - inst.l[i]);
  mlp.xi = xi;
  mlp.beta = linf_norm(resid) / xi + 1.0;
  const double c1 = l1_norm(inst.c);
  mlp.c1_guard = c1 > 0.0 ? c1 : 1.0;
  mlp.delta_prime = delta / (10.0 * m * w * w) * std::min(1.0, mlp.c1_guard);

  // modified instance
  mlp.lp.a = TwoSparseMatrix(n);
  for (int r = 0; r < m; ++r) {
    const TsEntry* e = inst.a.row(r);
    mlp.lp.a.add_row(std::span<const TsEntry>(e, static_cast<size_t>(inst.a.row_nnz(r))));
  }
  mlp.lp.b = inst.b;
  mlp.lp.c = inst.c;
  mlp.lp.l = inst.l;
  mlp.lp.u = inst.u;
  mlp.aux_flat.assign(n, 0);
  const double aux_cost = 2.0 * mlp.c1_guard / mlp.delta_prime;
  for (int j = 0; j < n; ++j) {
    const double sigma = resid[j] >= 0.0 ? 1.0 : -1.0;
    const double xt = std::fabs(resid[j]) / mlp.beta;
    TsEntry ent{j, mlp.beta * sigma};
    mlp.lp.a.add_row(std::span<const TsEntry>(&ent, 1));
    if (xt > 0.0) {
      mlp.lp.c.push_back(aux_cost);
      mlp.lp.l.push_back(0.0);
      mlp.lp.u.push_back(2.0 * xt);
    } else {
      // exactly satisfied coordinate: flat auxiliary with a tiny symmetric box
      mlp.aux_flat[j] = 1;
      const double w0 = std::min(xi / 2.0, delta / (4.0 * mlp.beta * (n + 1.0)));
      mlp.lp.c.push_back(0.0);
      mlp.lp.l.push_back(-w0);
      mlp.lp.u.push_back(w0);
    }
  }
  const int mbar = m + n;
  const double logratio = std::max(1.0, std::log(static_cast<double>(mbar) / std::max(1, n)));
  mlp.eps = 1.0 / (4.0 * c_const * logratio);
  const double pexp = 1.0 - 1.0 / (4.0 * std::log(4.0 * static_cast<double>(mbar) / std::max(1, n)));
  mlp.c_norm = c_const / (1.0 - pexp);
  mlp.gamma = mlp.eps * mlp.eps /
              (c_const * c_const * std::log(c_const * mbar / (mlp.eps * mlp.eps)));
  mlp.mu_init = 4.0 * m * mlp.c1_guard * xi / (mlp.eps * mlp.delta_prime);
  return mlp;
}

CenteredPoint initial_point(const ModifiedLp& mlp) {
  CenteredPoint pt;
  const int m = mlp.m_orig, n = mlp.n;
  pt.x.resize(m + n);
  for (int i = 0; i < m; ++i) pt.x[i] = 0.5 * (mlp.lp.l[i] + mlp.lp.u[i]);
  for (int j = 0; j < n; ++j) pt.x[m + j] = 0.5 * (mlp.lp.l[m + j] + mlp.lp.u[m + j]);
  pt.z.assign(n, 0.0);
  pt.s = mlp.lp.c;
  pt.mu = mlp.mu_init;
  const auto be = barrier_eval(pt.x, mlp.lp.l, mlp.lp.u);
  pt.tau = lewis_weights(mlp.lp.a, be.d2).tau;
  return pt;
}

namespace {

double centrality_measure(const ModifiedLp& mlp, const Vec& x, const Vec& s, double mu,
                          const Vec& tau, const BarrierEval& be) {
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double denom = mu * tau[i] * std::sqrt(be.d2[i]);
    worst = std::max(worst, std::fabs(s[i] + mu * tau[i] * be.d1[i]) / denom);
  }
  (void)mlp;
  return worst;
}

Vec primal_residual(const ModifiedLp& mlp, const Vec& x) {
  Vec r = mlp.lp.b;
  const Vec at = mlp.lp.a.matvec_t(x);
  for (size_t j = 0; j < r.size(); ++j) r[j] -= at[j];
  return r;
}

}  // namespace

CentralityReport centrality_report(const ModifiedLp& mlp, const CenteredPoint& pt) {
  CentralityReport rep;
  const auto be = barrier_eval(pt.x, mlp.lp.l, mlp.lp.u);
  rep.centrality = centrality_measure(mlp, pt.x, pt.s, pt.mu, pt.tau, be);

  // dual identity residual ||cbar - Abar z - s||_inf
  double dual = 0.0;
  for (int r = 0; r < mlp.lp.a.rows(); ++r)
    dual = std::max(dual,
                    std::fabs(mlp.lp.c[r] - mlp.lp.a.row_dot(r, pt.z) - pt.s[r]));
  rep.dual_resid = dual;

  const Vec rp = primal_residual(mlp, pt.x);
  rep.feas_linf = linf_norm(rp);
  // || r ||_{(A^T (T Phi'')^{-1} A)^{-1}}
  Vec dinv(pt.x.size());
  for (size_t i = 0; i < pt.x.size(); ++i) dinv[i] = 1.0 / (pt.tau[i] * be.d2[i]);
  DenseSpdSolver solver;
  solver.factor(mlp.lp.a.gram(dinv));
  if (solver.ok) {
    const Vec y = solver.solve(rp);
    rep.feas_norm = std::sqrt(std::max(0.0, kern::dot(rp.data(), y.data(), rp.size())));
  }
  rep.objective = kern::dot(mlp.lp.c.data(), pt.x.data(), pt.x.size());
  return rep;
}

namespace {

struct NewtonOutcome {
  int steps = 0;
  double measure = 0.0;
  double granularity = 0.0;  // smallest representable centrality change
  bool resolution_stall = false;
};

// one ulp of movement in x_i changes the normalized centrality term by about
// sqrt(phi''_i) * ulp(x_i); below that the measure cannot be improved
double barrier_granularity(const ModifiedLp& mlp, const Vec& x, const BarrierEval& be) {
  double g = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double ulp =
        2.22e-16 * std::max({std::fabs(x[i]), std::fabs(mlp.lp.l[i]), std::fabs(mlp.lp.u[i])});
    g = std::max(g, std::sqrt(be.d2[i]) * ulp);
  }
  return g;
}

// damped Newton recentering at fixed mu; tau recomputed on entry only
NewtonOutcome recenter(const ModifiedLp& mlp, CenteredPoint& pt, PathStats* stats) {
  const int mbar = mlp.lp.a.rows(), n = mlp.n;
  pt.tau = lewis_weights(mlp.lp.a, barrier_eval(pt.x, mlp.lp.l, mlp.lp.u).d2, &pt.tau).tau;
  NewtonOutcome out;
  double last_measure = 1e300;
  int stall_count = 0;
  for (int it = 0; it < 50; ++it) {
    const auto be = barrier_eval(pt.x, mlp.lp.l, mlp.lp.u);
    out.granularity = barrier_granularity(mlp, pt.x, be);
    if (stats) {
      double lo = 1e300, hi = 0.0;
      for (double d : be.d2) {
        lo = std::min(lo, std::sqrt(d));
        hi = std::max(hi, std::sqrt(d));
      }
      stats->phi2_log_ratio = std::max(stats->phi2_log_ratio, std::log(hi / lo));
    }
    out.measure = centrality_measure(mlp, pt.x, pt.s, pt.mu, pt.tau, be);
    const Vec rp = primal_residual(mlp, pt.x);
    const bool feas_ok = linf_norm(rp) <= 1e-13 * (1.0 + linf_norm(mlp.lp.b));
    if (out.measure <= 0.95 * mlp.eps && (feas_ok || it > 0)) break;
    out.steps++;

    Vec rho(mbar), dinv(mbar);
    for (int i = 0; i < mbar; ++i) {
      rho[i] = pt.s[i] + pt.mu * pt.tau[i] * be.d1[i];
      dinv[i] = 1.0 / (pt.mu * pt.tau[i] * be.d2[i]);
    }
    Vec dz;
    if (n > 0) {
      // (Abar^T D Abar) dz = rp + Abar^T D rho
      Vec rhs = rp;
      {
        Vec tmp(mbar);
        for (int i = 0; i < mbar; ++i) tmp[i] = dinv[i] * rho[i];
        const Vec add = mlp.lp.a.matvec_t(tmp);
        for (int j = 0; j < n; ++j) rhs[j] += add[j];
      }
      DenseSpdSolver solver;
      solver.factor(mlp.lp.a.gram(dinv));
      if (!solver.ok) throw std::runtime_error("ipm: newton system singular");
      dz = solver.solve(rhs);
    }
    Vec dx(mbar);
    {
      Vec adz(mbar, 0.0);
      if (n > 0) adz = mlp.lp.a.matvec(dz);
      for (int i = 0; i < mbar; ++i) dx[i] = dinv[i] * (adz[i] - rho[i]);
    }
    // box-safe damping
    double alpha = 1.0;
    for (int i = 0; i < mbar; ++i) {
      if (dx[i] > 0.0) alpha = std::min(alpha, 0.995 * (mlp.lp.u[i] - pt.x[i]) / dx[i]);
      else if (dx[i] < 0.0) alpha = std::min(alpha, 0.995 * (mlp.lp.l[i] - pt.x[i]) / dx[i]);
    }
    alpha = std::max(alpha, 0.0);
    // backtrack on the centrality measure
    for (int bt = 0; bt < 30; ++bt) {
      Vec xn = pt.x, zn = pt.z, sn(mbar);
      for (int i = 0; i < mbar; ++i) xn[i] += alpha * dx[i];
      for (int j = 0; j < n; ++j) zn[j] += alpha * dz[j];
      for (int i = 0; i < mbar; ++i) sn[i] = mlp.lp.c[i] - mlp.lp.a.row_dot(i, zn);
      bool interior = true;
      for (int i = 0; i < mbar && interior; ++i)
        interior = xn[i] > mlp.lp.l[i] && xn[i] < mlp.lp.u[i];
      if (interior) {
        const auto ben = barrier_eval(xn, mlp.lp.l, mlp.lp.u);
        const double mn = centrality_measure(mlp, xn, sn, pt.mu, pt.tau, ben);
        if (mn <= out.measure * (1.0 - 0.01 * alpha) || mn <= 0.9 * mlp.eps) {
          pt.x = std::move(xn);
          pt.z = std::move(zn);
          pt.s = std::move(sn);
          out.measure = mn;
          break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-12) break;  // no representable step; the stall logic decides
    }
    if (out.measure <= 0.95 * mlp.eps) break;
    if (out.measure >= last_measure * 0.999) {
      // no representable progress: accept when within the barrier granularity
      if (++stall_count >= 2) {
        if (out.measure <= mlp.eps + 16.0 * out.granularity) {
          out.resolution_stall = true;
          break;
        }
        throw std::runtime_error("ipm: recentering stalled at measure " +
                                 std::to_string(out.measure) + ", eps " +
                                 std::to_string(mlp.eps));
      }
    } else {
      stall_count = 0;
    }
    last_measure = out.measure;
    if (it == 49)
      throw std::runtime_error("ipm: centrality not restored within 50 newton steps, measure " +
                               std::to_string(out.measure) + " eps " + std::to_string(mlp.eps));
  }
  return out;
}

}  // namespace

CenteredPoint path_following(const ModifiedLp& mlp, CenteredPoint start, double mu_final,
                             PathStats* stats, bool want_trace) {
  if (!(mu_final > 0.0)) throw std::invalid_argument("path_following: mu_final must be positive");
  CenteredPoint pt = std::move(start);
  const double rate = 1.0 - 1.0 / (64.0 * std::sqrt(std::max(1, mlp.n)));
  double prev_obj = 1e300;
  const double slack_n = 2.0 * std::max(1, mlp.n);
  while (true) {
    const auto nw = recenter(mlp, pt, stats);
    if (stats) {
      ++stats->steps;
      stats->newton_total += nw.steps;
      stats->max_centrality = std::max(stats->max_centrality, nw.measure);
      stats->max_centrality_eff = std::max(
          stats->max_centrality_eff, nw.measure - 16.0 * nw.granularity);
      if (nw.resolution_stall) ++stats->resolution_stalls;
      const auto rep = centrality_report(mlp, pt);
      stats->max_feas_norm = std::max(stats->max_feas_norm, rep.feas_norm);
      stats->max_dual_resid = std::max(stats->max_dual_resid, rep.dual_resid);
      if (rep.objective > prev_obj + slack_n * pt.mu) ++stats->objective_monotone_violations;
      prev_obj = rep.objective;
      if (want_trace)
        stats->trace.push_back({pt.mu, rep.centrality, rep.feas_norm, rep.objective, nw.steps});
    }
    if (pt.mu <= mu_final) break;
    pt.mu = std::max(mu_final, pt.mu * rate);
  }
  return pt;
}

FinalPoint final_point(const ModifiedLp& mlp, const CenteredPoint& pt) {
  const int mbar = mlp.lp.a.rows();
  FinalPoint out;
  out.x = pt.x;
  out.s = pt.s;
  // project onto Abar^T x = bbar in the (T Phi'')^{-1} metric, damped to stay
  // inside the box
  for (int round = 0; round < 8; ++round) {
    const Vec rp = primal_residual(mlp, out.x);
    if (linf_norm(rp) <= 1e-13 * (1.0 + linf_norm(mlp.lp.b))) break;
    const auto be = barrier_eval(out.x, mlp.lp.l, mlp.lp.u);
    Vec dinv(mbar);
    for (int i = 0; i < mbar; ++i) dinv[i] = 1.0 / (pt.tau[i] * be.d2[i]);
    DenseSpdSolver solver;
    solver.factor(mlp.lp.a.gram(dinv));
    if (!solver.ok) break;
    const Vec y = solver.solve(rp);
    Vec delta(mbar);
    const Vec ay = mlp.lp.a.matvec(y);
    for (int i = 0; i < mbar; ++i) delta[i] = dinv[i] * ay[i];
    double theta = 1.0;
    for (int i = 0; i < mbar; ++i) {
      if (delta[i] > 0.0) theta = std::min(theta, 0.9999 * (mlp.lp.u[i] - out.x[i]) / delta[i]);
      else if (delta[i] < 0.0)
        theta = std::min(theta, 0.9999 * (mlp.lp.l[i] - out.x[i]) / delta[i]);
    }
    if (!(theta > 0.0)) throw std::runtime_error("final_point: projection blocked by the box");
    for (int i = 0; i < mbar; ++i) out.x[i] += theta * delta[i];
    if (theta == 1.0) break;
  }
  out.feas_linf = linf_norm(primal_residual(mlp, out.x));
  out.objective = kern::dot(mlp.lp.c.data(), out.x.data(), out.x.size());
  return out;
}

namespace {

// no equality constraints: the central path decouples per coordinate and
// c_i + mu phi'(x_i) = 0 has a unique interior root (phi' is increasing)
LpSolveReport solve_boxonly_lp(const LpInstance& inst, double delta) {
  LpSolveReport rep;
  const int m = inst.n_rows();
  rep.x.resize(m);
  const double mu = delta / (8.0 * std::max(1, m));
  for (int i = 0; i < m; ++i) {
    double lo = inst.l[i], hi = inst.u[i];
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double d1 = -1.0 / (mid - inst.l[i]) + 1.0 / (inst.u[i] - mid);
      if (inst.c[i] + mu * d1 > 0.0) hi = mid;
      else lo = mid;
    }
    rep.x[i] = 0.5 * (lo + hi);
    rep.objective += inst.c[i] * rep.x[i];
  }
  rep.mu_final = mu;
  return rep;
}

}  // namespace

LpSolveReport solve_two_sparse_lp(const LpInstance& inst, double delta, bool want_trace) {
  if (inst.n_cols() == 0) return solve_boxonly_lp(inst, delta);
  LpSolveReport rep;
  ModifiedLp mlp = initialize_lp(inst, delta);
  CenteredPoint pt = initial_point(mlp);
  // mu carries objective units, so the Lemma-7.11-style gap K n mu <= delta/2
  // only needs the original cost scale; folding the auxiliary costs in would
  // push mu below what double precision can certify as centered.
  rep.mu_final =
      delta * mlp.eps / (64.0 * std::max(1, mlp.n) * mlp.c1_guard * std::max(mlp.xi, 1e-300));
  rep.mu_final = std::min(rep.mu_final, mlp.mu_init);
  pt = path_following(mlp, std::move(pt), rep.mu_final, &rep.path, want_trace);
  const FinalPoint fin = final_point(mlp, pt);

  const int m = mlp.m_orig;
  rep.x.assign(fin.x.begin(), fin.x.begin() + m);
  for (int i = 0; i < m; ++i) rep.x[i] = std::clamp(rep.x[i], inst.l[i], inst.u[i]);
  rep.objective = kern::dot(inst.c.data(), rep.x.data(), m);
  // ||A^T x - b||_inf on the original instance
  Vec r = inst.b;
  for (int row = 0; row < m; ++row) {
    const TsEntry* e = inst.a.row(row);
    for (int k = 0; k < inst.a.row_nnz(row); ++k) r[e[k].col] -= e[k].val * rep.x[row];
  }
  rep.feas_linf = linf_norm(r);
  for (size_t i = m; i < fin.x.size(); ++i) rep.aux_mass += std::fabs(fin.x[i]);
  rep.aux_bound = mlp.delta_prime * (mlp.xi / 2.0 + delta / (2.0 * mlp.c1_guard));
  rep.infeasible = rep.aux_mass > 10.0 * rep.aux_bound + 1e-12;
  return rep;
}

namespace {

LpInstance gamma_flow_lp(int n, const std::vector<LossyEdge>& gamma_edges, const Vec& cost,
                         const Vec& capacity, const Vec& b, const std::vector<int>& colmap,
                         int ncols) {
  LpInstance inst;
  inst.a = TwoSparseMatrix(ncols);
  for (size_t e = 0; e < gamma_edges.size(); ++e) {
    const auto& ed = gamma_edges[e];
    if (!(ed.eta > 0.0)) throw std::invalid_argument("flow: gain must be positive");
    if (!(capacity[e] > 0.0)) throw std::invalid_argument("flow: capacity must be positive");
    TsEntry ent[2];
    int cnt = 0;
    if (colmap[ed.tail] >= 0) ent[cnt++] = {colmap[ed.tail], -1.0};
    if (colmap[ed.head] >= 0) ent[cnt++] = {colmap[ed.head], ed.eta};  // eta slot holds gamma
    inst.a.add_row(std::span<const TsEntry>(ent, static_cast<size_t>(cnt)));
  }
  (void)n;
  inst.b = b;
  inst.c = cost;
  inst.l.assign(gamma_edges.size(), 0.0);
  inst.u = capacity;
  return inst;
}

}  // namespace

FlowReport solve_generalized_mincost(int n, const std::vector<LossyEdge>& gamma_edges,
                                     const Vec& cost, const Vec& capacity, const Vec& demand,
                                     double delta, bool want_trace) {
  std::vector<int> colmap(n);
  for (int i = 0; i < n; ++i) colmap[i] = i;
  LpInstance inst = gamma_flow_lp(n, gamma_edges, cost, capacity, demand, colmap, n);
  FlowReport out;
  out.lp = solve_two_sparse_lp(inst, delta, want_trace);
  out.flow = out.lp.x;
  out.infeasible = out.lp.infeasible;
  out.value = out.lp.objective;
  Vec im(n, 0.0);
  for (size_t e = 0; e < gamma_edges.size(); ++e) {
    im[gamma_edges[e].head] += gamma_edges[e].eta * out.flow[e];
    im[gamma_edges[e].tail] -= out.flow[e];
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::fabs(im[i] - demand[i]));
  out.imbalance_linf = worst;
  return out;
}

FlowReport solve_generalized_maxflow(int n, const std::vector<LossyEdge>& gamma_edges, int s,
                                     int t, const Vec& capacity, double delta, bool want_trace) {
  if (s == t || s < 0 || t < 0 || s >= n || t >= n)
    throw std::invalid_argument("maxflow: bad source/sink");
  std::vector<int> colmap(n, -1);
  int ncols = 0;
  for (int i = 0; i < n; ++i)
    if (i != s && i != t) colmap[i] = ncols++;
  Vec cost(gamma_edges.size(), 0.0);
  for (size_t e = 0; e < gamma_edges.size(); ++e) {
    // minimize -(B^T f)_t
    if (gamma_edges[e].head == t) cost[e] -= gamma_edges[e].eta;
    if (gamma_edges[e].tail == t) cost[e] += 1.0;
  }
  Vec b(ncols, 0.0);
  LpInstance inst = gamma_flow_lp(n, gamma_edges, cost, capacity, b, colmap, ncols);
  FlowReport out;
  out.lp = solve_two_sparse_lp(inst, delta, want_trace);
  out.flow = out.lp.x;
  out.infeasible = out.lp.infeasible;
  out.value = -out.lp.objective;  // im(f)_t
  Vec im(n, 0.0);
  for (size_t e = 0; e < gamma_edges.size(); ++e) {
    im[gamma_edges[e].head] += gamma_edges[e].eta * out.flow[e];
    im[gamma_edges[e].tail] -= out.flow[e];
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != s && i != t) worst = std::max(worst, std::fabs(im[i]));
  out.imbalance_linf = worst;
  return out;
}

}  // namespace gflow
