#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gflow/rng.hpp"

namespace gflow {

// Dense +-1/sqrt(k) sketch columns, regenerated from a counter-based hash so
// the k x m matrix never has to be stored. A fresh epoch seed gives a fresh
// sketch; columns are a pure function of (epoch_seed, column index).
struct JlSketch {
  int k = 0;
  uint64_t epoch_seed = 0;

  static int dimension(long long m, long long n) {
    // k = ceil(48 * ln(budget / delta_fail)), budget = m^3 queries,
    // delta_fail = n^-10.
    const double mm = static_cast<double>(std::max(2LL, m));
    const double nn = static_cast<double>(std::max(2LL, n));
    return static_cast<int>(std::ceil(48.0 * (3.0 * std::log(mm) + 10.0 * std::log(nn))));
  }

  // Writes the +-1/sqrt(k) column for edge e into out[0..k).
  void column(int e, double* out) const {
    const double s = 1.0 / std::sqrt(static_cast<double>(k));
    uint64_t ctr = epoch_seed ^ splitmix64(0x9d3f7a11u + static_cast<uint64_t>(e) * 0x100000001b3ULL);
    int r = 0;
    while (r < k) {
      uint64_t bits = splitmix64(ctr++);
      for (int b = 0; b < 64 && r < k; ++b, ++r) {
        out[r] = (bits >> b) & 1u ? s : -s;
      }
    }
  }
};

}  // namespace gflow
