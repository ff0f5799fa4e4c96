#pragma once

#include <string>
#include <vector>

#include "gflow/lp_instance.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// Parse failures carry the offending line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

// Gain-DIMACS network file:
//   p gmcf <n> <m> v1   |   p gmax <n> <m> v1
//   n <id> <demand>         (gmcf; omitted vertices default to 0)
//   n <id> s|t              (gmax)
//   a <tail> <head> <capacity> <cost> <gain>
struct GainDimacs {
  bool maxflow = false;
  int n = 0;
  std::vector<LossyEdge> gamma_edges;  // eta slot carries gamma
  Vec capacity, cost;
  Vec demand;       // gmcf
  int s = -1, t = -1;  // gmax
};
GainDimacs parse_gain_dimacs(const std::string& path);

// LP JSON: {"version":"v1","rows":[[[col,val],...],...],"b":[...],"c":[...],
//           "l":[...],"u":[...],"delta":...}
struct LpJson {
  LpInstance inst;
  double delta = 1e-3;
};
LpJson parse_lp_json(const std::string& path);

// hh-bench stream:
//   p hh <n> v1
//   I <i> <j> <eta> <g>
//   D <e> | S <e> <g> | T <e> <tau>
//   Q <eps> <h-file>
//   P <C0> <C1> <C2> <C3> <h-file>
struct StreamOp {
  char op = 'I';
  int e = 0, i = 0, j = 0;
  double eta = 1.0, g = 1.0, tau = 0.0, eps = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  std::string h_file;
};
struct HhStream {
  int n = 0;
  std::vector<StreamOp> ops;
};
HhStream parse_hh_stream(const std::string& path);

Vec parse_vector_file(const std::string& path, int expected_len);

}  // namespace gflow
