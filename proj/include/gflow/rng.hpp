#pragma once

#include <cstdint>
#include <random>

namespace gflow {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// All randomized components derive their stream from one master seed so a
// run is reproducible from the CLI --seed alone.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  double uniform() { return unit_(eng_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() { return gauss_(eng_); }
  // in [0, n)
  uint64_t index(uint64_t n) {
    std::uniform_int_distribution<uint64_t> d(0, n - 1);
    return d(eng_);
  }
  uint64_t raw() { return eng_(); }

  Rng child(uint64_t tag) { return Rng(splitmix64(eng_() ^ splitmix64(tag))); }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace gflow
