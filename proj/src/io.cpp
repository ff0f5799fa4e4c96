#include "gflow/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gflow {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return in;
}

}  // namespace

GainDimacs parse_gain_dimacs(const std::string& path) {
  auto in = open_or_throw(path);
  GainDimacs out;
  std::string line;
  int ln = 0;
  bool have_p = false;
  int arcs_declared = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag == "c") continue;
    if (tag == "p") {
      std::string kind, ver;
      int n = 0, m = 0;
      if (!(ss >> kind >> n >> m)) throw ParseError("malformed problem line", ln);
      ss >> ver;
      if (ver != "v1" && !ver.empty()) throw ParseError("unknown format version", ln);
      if (kind == "gmax") out.maxflow = true;
      else if (kind != "gmcf") throw ParseError("expected gmcf or gmax", ln);
      if (n <= 0 || m < 0) throw ParseError("bad sizes", ln);
      out.n = n;
      arcs_declared = m;
      out.demand.assign(n, 0.0);
      have_p = true;
    } else if (tag == "n") {
      if (!have_p) throw ParseError("node line before problem line", ln);
      int id;
      if (!(ss >> id) || id < 1 || id > out.n) throw ParseError("bad node id", ln);
      if (out.maxflow) {
        std::string role;
        if (!(ss >> role) || (role != "s" && role != "t"))
          throw ParseError("gmax node line needs s or t", ln);
        if (role == "s") {
          if (out.s >= 0) throw ParseError("duplicate source", ln);
          out.s = id - 1;
        } else {
          if (out.t >= 0) throw ParseError("duplicate sink", ln);
          out.t = id - 1;
        }
      } else {
        double d;
        if (!(ss >> d)) throw ParseError("gmcf node line needs a demand", ln);
        out.demand[id - 1] = d;
      }
    } else if (tag == "a") {
      if (!have_p) throw ParseError("arc line before problem line", ln);
      int u, v;
      double cap, cost, gain;
      if (!(ss >> u >> v >> cap >> cost >> gain)) throw ParseError("malformed arc line", ln);
      if (u < 1 || u > out.n || v < 1 || v > out.n || u == v)
        throw ParseError("bad arc endpoints", ln);
      if (!(cap > 0.0)) throw ParseError("capacity must be positive", ln);
      if (!(gain > 0.0)) throw ParseError("gain must be positive", ln);
      out.gamma_edges.push_back({u - 1, v - 1, gain, 1.0});
      out.capacity.push_back(cap);
      out.cost.push_back(cost);
    } else {
      throw ParseError("unknown line tag '" + tag + "'", ln);
    }
  }
  if (!have_p) throw ParseError("missing problem line", ln);
  if (static_cast<int>(out.gamma_edges.size()) != arcs_declared)
    throw ParseError("arc count does not match the problem line", ln);
  if (out.maxflow && (out.s < 0 || out.t < 0)) throw ParseError("gmax needs one s and one t", ln);
  return out;
}

LpJson parse_lp_json(const std::string& path) {
  auto in = open_or_throw(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("json: ") + e.what(), 0);
  }
  LpJson out;
  try {
    if (j.contains("version") && j["version"] != "v1") throw ParseError("unknown version", 0);
    const auto& rows = j.at("rows");
    const Vec b = j.at("b").get<Vec>();
    out.inst.a = TwoSparseMatrix(static_cast<int>(b.size()));
    for (const auto& row : rows) {
      std::vector<TsEntry> ent;
      for (const auto& pair : row)
        ent.push_back({pair.at(0).get<int>(), pair.at(1).get<double>()});
      out.inst.a.add_row(ent);
    }
    out.inst.b = b;
    out.inst.c = j.at("c").get<Vec>();
    out.inst.l = j.at("l").get<Vec>();
    out.inst.u = j.at("u").get<Vec>();
    if (j.contains("delta")) out.delta = j["delta"].get<double>();
    out.inst.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("lp json: ") + e.what(), 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("lp json: ") + e.what(), 0);
  }
  return out;
}

HhStream parse_hh_stream(const std::string& path) {
  auto in = open_or_throw(path);
  HhStream out;
  std::string line;
  int ln = 0;
  bool have_p = false;
  while (std::getline(in, line)) {
    ++ln;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag == "c") continue;
    StreamOp op;
    if (tag == "p") {
      std::string kind, ver;
      if (!(ss >> kind >> out.n)) throw ParseError("malformed header", ln);
      ss >> ver;
      if (kind != "hh" || out.n <= 1) throw ParseError("expected 'p hh <n> v1'", ln);
      have_p = true;
      continue;
    }
    if (!have_p) throw ParseError("op before header", ln);
    if (tag == "I") {
      op.op = 'I';
      if (!(ss >> op.i >> op.j >> op.eta >> op.g)) throw ParseError("malformed I op", ln);
    } else if (tag == "D") {
      op.op = 'D';
      if (!(ss >> op.e)) throw ParseError("malformed D op", ln);
    } else if (tag == "S") {
      op.op = 'S';
      if (!(ss >> op.e >> op.g)) throw ParseError("malformed S op", ln);
    } else if (tag == "T") {
      op.op = 'T';
      if (!(ss >> op.e >> op.tau)) throw ParseError("malformed T op", ln);
    } else if (tag == "Q") {
      op.op = 'Q';
      if (!(ss >> op.eps >> op.h_file)) throw ParseError("malformed Q op", ln);
    } else if (tag == "P") {
      op.op = 'P';
      if (!(ss >> op.c0 >> op.c1 >> op.c2 >> op.c3 >> op.h_file))
        throw ParseError("malformed P op", ln);
    } else {
      throw ParseError("unknown op '" + tag + "'", ln);
    }
    out.ops.push_back(op);
  }
  if (!have_p) throw ParseError("missing header", ln);
  return out;
}

Vec parse_vector_file(const std::string& path, int expected_len) {
  auto in = open_or_throw(path);
  Vec v;
  double x;
  while (in >> x) v.push_back(x);
  if (expected_len >= 0 && static_cast<int>(v.size()) != expected_len)
    throw ParseError("vector file '" + path + "' has wrong length", 0);
  return v;
}

}  // namespace gflow
