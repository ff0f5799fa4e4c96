#pragma once

#include <cstdint>
#include <vector>

#include "gflow/lossy_graph.hpp"

namespace gflow {

struct DecompPart {
  std::vector<int> edge_ids;  // indices into the input edge list
  double cert_phi = 0.0;      // certified lower bound on conductance
  bool exact_cert = false;    // exhaustive conductance vs Cheeger bound
  double lambda2 = 0.0;       // lambda_2 of the part's normalized Laplacian, when computed
};

// Edge-disjoint partition of the smoothed graph into parts certified to have
// conductance >= phi_target: recursive Fiedler sweep cut, exhaustive
// conductance for tiny parts, Cheeger lower bound lambda_2/2 otherwise.
// Crossing edges of a split become singleton parts (conductance 1).
std::vector<DecompPart> decompose_expanders(const LossyGraph& g, double phi_target,
                                            int dense_cap = 400, uint64_t seed = 0);

// Best sweep cut of the smoothed graph from its Fiedler embedding; returns
// vertex side S and its conductance. Requires a connected graph.
struct SweepCut {
  std::vector<int> side;
  double phi = 1.0;
};
SweepCut fiedler_sweep_cut(const LossyGraph& g, uint64_t seed);

}  // namespace gflow
