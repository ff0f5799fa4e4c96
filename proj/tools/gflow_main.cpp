// gflow command line: generalized-flow solvers, heavy-hitter bench, spectral
// reports and brute-force oracle runs.

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflow/expander_decomp.hpp"
#include "gflow/hh_general.hpp"
#include "gflow/io.hpp"
#include "gflow/ipm.hpp"
#include "gflow/oracles.hpp"
#include "gflow/spectral.hpp"

using json = nlohmann::ordered_json;
using namespace gflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitContract = 3;

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
}

json flow_json(const FlowReport& rep, const char* value_key) {
  json j;
  j["flow"] = rep.flow;
  j[value_key] = rep.value;
  j["imbalance_linf"] = rep.imbalance_linf;
  j["aux_mass"] = rep.lp.aux_mass;
  j["iterations"] = rep.lp.path.steps;
  j["newton_steps"] = rep.lp.path.newton_total;
  return j;
}

json trace_json(const PathStats& st) {
  json rows = json::array();
  for (const auto& r : st.trace)
    rows.push_back({{"mu", r.mu},
                    {"centrality", r.centrality},
                    {"feasibility", r.feasibility},
                    {"objective", r.objective},
                    {"newton", r.newton_steps}});
  return rows;
}

LpInstance flow_lp_for_oracle(const GainDimacs& gd) {
  // the mincost LP in oracle form
  LpInstance inst;
  inst.a = TwoSparseMatrix(gd.n);
  for (size_t e = 0; e < gd.gamma_edges.size(); ++e) {
    TsEntry ent[2] = {{gd.gamma_edges[e].tail, -1.0}, {gd.gamma_edges[e].head, gd.gamma_edges[e].eta}};
    inst.a.add_row(ent);
  }
  inst.b = gd.demand;
  inst.c = gd.cost;
  inst.l.assign(gd.gamma_edges.size(), 0.0);
  inst.u = gd.capacity;
  return inst;
}

LpInstance maxflow_lp_for_oracle(const GainDimacs& gd) {
  std::vector<int> colmap(gd.n, -1);
  int ncols = 0;
  for (int i = 0; i < gd.n; ++i)
    if (i != gd.s && i != gd.t) colmap[i] = ncols++;
  LpInstance inst;
  inst.a = TwoSparseMatrix(ncols);
  for (size_t e = 0; e < gd.gamma_edges.size(); ++e) {
    TsEntry ent[2];
    int cnt = 0;
    if (colmap[gd.gamma_edges[e].tail] >= 0) ent[cnt++] = {colmap[gd.gamma_edges[e].tail], -1.0};
    if (colmap[gd.gamma_edges[e].head] >= 0)
      ent[cnt++] = {colmap[gd.gamma_edges[e].head], gd.gamma_edges[e].eta};
    inst.a.add_row(std::span<const TsEntry>(ent, static_cast<size_t>(cnt)));
  }
  inst.b.assign(ncols, 0.0);
  inst.c.assign(gd.gamma_edges.size(), 0.0);
  for (size_t e = 0; e < gd.gamma_edges.size(); ++e) {
    if (gd.gamma_edges[e].head == gd.t) inst.c[e] -= gd.gamma_edges[e].eta;
    if (gd.gamma_edges[e].tail == gd.t) inst.c[e] += 1.0;
  }
  inst.l.assign(gd.gamma_edges.size(), 0.0);
  inst.u = gd.capacity;
  return inst;
}

oracle::LpOracleResult run_lp_oracle(const LpInstance& inst, bool* used_enumeration) {
  const int m = inst.n_rows(), n = inst.n_cols();
  double log_combos = 0.0;
  for (int k = 1; k <= n; ++k)
    log_combos += std::log2(static_cast<double>(m - k + 1)) - std::log2(static_cast<double>(k));
  log_combos += m - n;
  *used_enumeration = n == 0 || (m - n <= 22 && log_combos <= 24.0);
  return *used_enumeration ? oracle::lp_vertex_enumerate(inst) : oracle::lp_simplex(inst);
}

void attach_oracle(json* j, const LpInstance& inst, double objective, double delta) {
  bool used_enum = false;
  const auto res = run_lp_oracle(inst, &used_enum);
  (*j)["oracle"]["checked"] = true;
  (*j)["oracle"]["method"] = used_enum ? "vertex-enumeration" : "simplex";
  (*j)["oracle"]["feasible"] = res.feasible;
  if (res.feasible) {
    (*j)["oracle"]["opt"] = res.opt;
    (*j)["oracle"]["gap"] = objective - res.opt;
    (*j)["oracle"]["oracle_gap_le_delta"] = objective - res.opt <= delta + 1e-9;
  }
}

int cmd_solve_lp(const std::string& file, double delta_flag, uint64_t seed, bool trace,
                 bool check_oracle, const std::string& out_path) {
  (void)seed;
  const LpJson in = parse_lp_json(file);
  const double delta = delta_flag > 0.0 ? delta_flag : in.delta;
  const auto rep = solve_two_sparse_lp(in.inst, delta, trace);
  json j;
  j["version"] = "v1";
  j["command"] = "solve-lp";
  j["delta"] = delta;
  j["x"] = rep.x;
  j["objective"] = rep.objective;
  j["infeasibility_linf"] = rep.feas_linf;
  j["aux_mass"] = rep.aux_mass;
  j["iterations"] = rep.path.steps;
  j["newton_steps"] = rep.path.newton_total;
  j["infeasible"] = rep.infeasible;
  if (trace) j["trace"] = trace_json(rep.path);
  if (check_oracle) attach_oracle(&j, in.inst, rep.objective, delta);
  emit(j, out_path);
  return rep.infeasible ? kExitInfeasible : kExitOk;
}

int cmd_flow(const std::string& file, bool maxflow_cmd, double delta_flag, uint64_t seed,
             bool trace, bool check_oracle, const std::string& out_path) {
  (void)seed;
  const GainDimacs gd = parse_gain_dimacs(file);
  if (gd.maxflow != maxflow_cmd)
    throw ParseError(maxflow_cmd ? "file is gmcf but command is solve-maxflow"
                                 : "file is gmax but command is solve-mincost",
                     0);
  const double delta = delta_flag > 0.0 ? delta_flag : 1e-4;
  json j;
  j["version"] = "v1";
  j["delta"] = delta;
  FlowReport rep;
  if (maxflow_cmd) {
    rep = solve_generalized_maxflow(gd.n, gd.gamma_edges, gd.s, gd.t, gd.capacity, delta, trace);
    j["command"] = "solve-maxflow";
    j.update(flow_json(rep, "value"));
    if (check_oracle) {
      const LpInstance inst = maxflow_lp_for_oracle(gd);
      attach_oracle(&j, inst, -rep.value, delta);
    }
  } else {
    rep = solve_generalized_mincost(gd.n, gd.gamma_edges, gd.cost, gd.capacity, gd.demand, delta,
                                    trace);
    j["command"] = "solve-mincost";
    j.update(flow_json(rep, "cost"));
    if (check_oracle) attach_oracle(&j, flow_lp_for_oracle(gd), rep.value, delta);
  }
  if (trace) j["trace"] = trace_json(rep.lp.path);
  j["infeasible"] = rep.infeasible;
  emit(j, out_path);
  return rep.infeasible ? kExitInfeasible : kExitOk;
}

int cmd_hh_bench(const std::string& file, uint64_t seed, const std::string& out_path) {
  const HhStream stream = parse_hh_stream(file);
  GeneralLossyHh::Config cfg;
  cfg.seed = seed + 1;
  GeneralLossyHh ds(stream.n, cfg);

  // shadow copy for the exact reference
  struct Shadow {
    int tail, head;
    double gamma_row_eta, g;
    bool alive;
    int sign;
  };
  std::vector<Shadow> shadow;

  json ops = json::array();
  long mismatches = 0;
  for (const auto& op : stream.ops) {
    json rec;
    rec["op"] = std::string(1, op.op);
    switch (op.op) {
      case 'I': {
        // normalize arbitrary eta > 0 to multiplier form
        int tail = op.i - 1, head = op.j - 1;
        double eta = op.eta;
        int sign = 1;
        if (eta < 1.0) {
          std::swap(tail, head);
          const double gscale = eta;
          eta = 1.0 / eta;
          rec["normalized"] = true;
          // row g*(1_head' - eta' 1_tail') with weight g * gamma
          const int id = ds.insert(tail, head, eta, op.g * gscale, 0.0, -1);
          shadow.push_back({tail, head, eta, op.g * gscale, true, -1});
          rec["edge"] = id + 1;
          break;
        }
        const int id = ds.insert(tail, head, eta, op.g, 0.0, sign);
        shadow.push_back({tail, head, eta, op.g, true, sign});
        rec["edge"] = id + 1;
        break;
      }
      case 'D':
        ds.del(op.e - 1);
        shadow[op.e - 1].alive = false;
        break;
      case 'S':
        ds.scale(op.e - 1, op.g);
        shadow[op.e - 1].g = op.g;
        break;
      case 'T':
        ds.scale_tau(op.e - 1, op.tau);
        break;
      case 'Q': {
        const Vec h = parse_vector_file(op.h_file, stream.n);
        const auto got = ds.query_heavy(h, op.eps);
        std::vector<int> want;
        for (size_t e = 0; e < shadow.size(); ++e) {
          if (!shadow[e].alive) continue;
          const double v = shadow[e].g * (h[shadow[e].head] - shadow[e].gamma_row_eta * h[shadow[e].tail]);
          if (std::fabs(v) >= op.eps) want.push_back(static_cast<int>(e));
        }
        const bool match = got == want;
        if (!match) ++mismatches;
        json ids = json::array();
        for (int e : got) ids.push_back(e + 1);
        rec["heavy"] = ids;
        rec["exact_match"] = match;
        break;
      }
      case 'P': {
        const Vec h = parse_vector_file(op.h_file, stream.n);
        const auto r = ds.sample(h, op.c0, op.c1, op.c2, op.c3);
        rec["sampled_rows"] = r.size();
        double mass = 0.0;
        for (auto [e, w] : r) mass += w;
        rec["mass"] = mass;
        break;
      }
      default:
        break;
    }
    ops.push_back(rec);
  }
  const auto st = ds.stats();
  json j;
  j["version"] = "v1";
  j["command"] = "hh-bench";
  j["ops"] = ops;
  j["mismatches"] = mismatches;
  j["counters"] = {{"rebuilds", st.rebuilds},
                   {"subgraph_destructs", st.subgraph_destructs},
                   {"resets_query", st.resets_query},
                   {"resets_delete", st.resets_delete},
                   {"renorm_violations", st.renorm_violations},
                   {"candidate_work", st.candidate_work},
                   {"filter_evals", st.filter_evals},
                   {"counter_bound_ok", st.counter_bound_ok}};
  emit(j, out_path);
  return mismatches == 0 ? kExitOk : kExitContract;
}

int cmd_spectral_report(const std::string& file, uint64_t seed, const std::string& out_path) {
  const GainDimacs gd = parse_gain_dimacs(file);
  const auto ing = from_gamma(gd.n, gd.gamma_edges);
  const auto view = build_incidence(ing.graph);
  const auto en = dense_eigs(view.normalized());
  const auto es = dense_eigs(view.normalized_smooth());
  const double beta = ing.graph.beta();
  const auto cond = conductance_exact(ing.graph, seed);
  double ratio = std::nan("");
  try {
    ratio = uniformity_ratio(view, view.d_lossy);
  } catch (const std::exception&) {
  }
  const auto least = least_eigvec(view, view.d_lossy, 1e-8, es.values.size() > 1 ? es.values[1] : 1.0,
                                  seed + 3);
  const auto cert = sandwich_check(view, view.d_lossy, least.v, least.lambda, 1e-8, 1.0, 2.0);
  std::ostringstream csv;
  csv << "beta,phi,phi_exact,lambda1,lambda2,uniformity_ratio,c_lo,c_hi,sandwich_ok\n";
  csv << beta << "," << cond.phi << "," << (cond.exact ? 1 : 0) << "," << en.values[0] << ","
      << (en.values.size() > 1 ? en.values[1] : 0.0) << "," << ratio << "," << cert.c_lo << ","
      << cert.c_hi << "," << (cert.ok ? 1 : 0) << "\n";
  if (out_path.empty()) std::cout << csv.str();
  else std::ofstream(out_path) << csv.str();
  return kExitOk;
}

int cmd_oracle(const std::string& file, const std::string& kind, const std::string& out_path) {
  json j;
  j["version"] = "v1";
  j["command"] = "oracle";
  if (kind == "lp") {
    const LpJson in = parse_lp_json(file);
    bool used_enum = false;
    const auto res = run_lp_oracle(in.inst, &used_enum);
    j["method"] = used_enum ? "vertex-enumeration" : "simplex";
    j["feasible"] = res.feasible;
    if (res.feasible) {
      j["opt"] = res.opt;
      j["x"] = res.x;
    }
  } else if (kind == "conductance") {
    const GainDimacs gd = parse_gain_dimacs(file);
    const auto ing = from_gamma(gd.n, gd.gamma_edges);
    const auto c = conductance_exact(ing.graph, 1);
    j["phi"] = c.phi;
    j["exact"] = c.exact;
  } else {
    std::cerr << "unknown oracle kind '" << kind << "' (lp | conductance)\n";
    return kExitContract;
  }
  emit(j, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized-flow toolkit"};
  app.require_subcommand(1);

  std::string file, out_path, oracle_kind = "lp";
  double delta = 0.0;
  uint64_t seed = 0;
  bool trace = false, check_oracle = false;

  auto add_common = [&](CLI::App* sub, bool needs_file = true) {
    if (needs_file) sub->add_option("file", file, "input file")->required();
    sub->add_option("--delta", delta, "target additive accuracy");
    sub->add_option("--seed", seed, "master random seed");
    sub->add_flag("--trace", trace, "emit per-iteration trace");
    sub->add_option("--json-out", out_path, "write JSON to a file instead of stdout");
    sub->add_flag("--check-oracle", check_oracle, "cross-check against the brute-force oracle");
  };

  auto* lp = app.add_subcommand("solve-lp", "solve a two-sparse LP from JSON");
  add_common(lp);
  auto* mc = app.add_subcommand("solve-mincost", "generalized min-cost flow");
  add_common(mc);
  auto* mf = app.add_subcommand("solve-maxflow", "generalized max flow");
  add_common(mf);
  auto* hb = app.add_subcommand("hh-bench", "heavy-hitter operation stream");
  add_common(hb);
  auto* sr = app.add_subcommand("spectral-report", "CSV spectral report for a network file");
  add_common(sr);
  auto* orc = app.add_subcommand("oracle", "brute-force reference runs");
  add_common(orc);
  orc->add_option("--kind", oracle_kind, "lp | conductance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lp->parsed()) return cmd_solve_lp(file, delta, seed, trace, check_oracle, out_path);
    if (mc->parsed()) return cmd_flow(file, false, delta, seed, trace, check_oracle, out_path);
    if (mf->parsed()) return cmd_flow(file, true, delta, seed, trace, check_oracle, out_path);
    if (hb->parsed()) return cmd_hh_bench(file, seed, out_path);
    if (sr->parsed()) return cmd_spectral_report(file, seed, out_path);
    if (orc->parsed()) return cmd_oracle(file, oracle_kind, out_path);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitOk;
}
