#pragma once

#include <cassert>
#include <vector>

namespace gflow {

// Fenwick tree over nonnegative weights with prefix-descent sampling.
class Fenwick {
 public:
  Fenwick() = default;
  explicit Fenwick(int n) : n_(n), t_(n + 1, 0.0), val_(n, 0.0) {}

  int size() const { return n_; }
  double total() const { return total_; }
  double value(int i) const { return val_[i]; }

  void set(int i, double v) {
    const double d = v - val_[i];
    if (d == 0.0) return;
    val_[i] = v;
    total_ += d;
    for (int k = i + 1; k <= n_; k += k & (-k)) t_[k] += d;
  }

  // Largest index i with prefix(i) <= r; requires 0 <= r < total().
  int sample(double r) const {
    int pos = 0;
    int mask = 1;
    while ((mask << 1) <= n_) mask <<= 1;
    for (; mask; mask >>= 1) {
      const int next = pos + mask;
      if (next <= n_ && t_[next] <= r) {
        pos = next;
        r -= t_[next];
      }
    }
    return pos < n_ ? pos : n_ - 1;
  }

 private:
  int n_ = 0;
  std::vector<double> t_;
  std::vector<double> val_;
  double total_ = 0.0;
};

}  // namespace gflow
