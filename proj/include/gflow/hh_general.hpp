#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <tuple>
#include <utility>
#include <vector>

#include "gflow/hh_balanced.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// Heavy hitter / norm / sampler on weighted lossy graphs: edges are mapped
// into (bit-class, direction, multiplier bucket, weight bucket) buckets, each
// holding a vertex-scaled balanced structure. Rows answer for g_e * (B h)_e.
class GeneralLossyHh {
 public:
  struct Config {
    double eps_ad = 1e-8;
    double phi = 0.02;
    double beta = 1e-4;
    double w_g_declared = 1e6;  // runtime weight ratio beyond its square rebuilds
    uint64_t seed = 1;
    int dense_cap = 400;
    bool debug_checks = false;
  };

  GeneralLossyHh(int n, Config cfg);

  // row  sign * g * (1_head - eta 1_tail)  with eta >= 1, g > 0.
  // arbitrary multiplier/orientation rows are normalized by the caller
  // (see TwoSparseHh) or via insert_gamma.
  int insert(int tail, int head, double eta, double g, double tau = 0.0, int sign = 1);
  void del(int e);
  void scale(int e, double g);  // delete + insert across weight buckets
  void scale_tau(int e, double b);
  bool edge_alive(int e) const;
  int live_edge_count() const { return m_live_; }
  int vertex_count() const { return n_; }

  // exactly {e : |g_e (B h)_e| >= eps}
  std::vector<int> query_heavy(const Vec& h, double eps);
  double norm_estimate(const Vec& h);  // ||G B h||^2 <= L <= O(phi^-4) ||G B h||^2
  std::vector<std::pair<int, double>> sample(const Vec& h, double c0, double c1, double c2,
                                             double c3);
  std::pair<Vec, double> sample_weights(const Vec& h, double c1, double c2, double c3);

  double row_value(int e, const Vec& h) const;  // signed g_e (B h)_e
  double weight(int e) const { return edges_[e].g; }
  BalancedHh::Stats stats() const;
  long rebuilds_weight_cap() const { return weight_cap_rebuilds_; }

 private:
  struct BucketKey {
    int bit = 0;        // lowest differing bit of (tail, head)
    int dir = 0;        // 0: tail bit is 0, 1: tail bit is 1
    long eta_idx = 0;   // floor(log eta / log(1+beta))
    long w_idx = 0;     // floor(log2(g / g_ref))
    bool operator<(const BucketKey& o) const {
      return std::tie(bit, dir, eta_idx, w_idx) < std::tie(o.bit, o.dir, o.eta_idx, o.w_idx);
    }
  };
  struct EdgeRec {
    int tail, head;
    double eta, g, tau;
    int sign = 1;
    bool alive = false;
    BucketKey key;
    int sub_id = -1;  // id inside the bucket's balanced structure
  };
  struct Bucket {
    std::unique_ptr<BalancedHh> ds;
    std::vector<int> owner_of;  // balanced id -> general edge id
    long live = 0;
  };

  BucketKey key_of(int tail, int head, double eta, double g) const;
  double scale_factor(const BucketKey& k, int vertex) const;  // S^{(i,j)} diagonal entry
  Bucket& bucket(const BucketKey& k);
  void place(int e);
  void full_rebuild();

  int n_;
  Config cfg_;
  Rng rng_;
  double g_ref_ = 0.0;  // fixed weight-bucket origin (logical offset keeps ids stable)
  double g_min_seen_ = 0.0, g_max_seen_ = 0.0;
  std::vector<EdgeRec> edges_;
  std::map<BucketKey, Bucket> buckets_;
  int m_live_ = 0;
  long weight_cap_rebuilds_ = 0;
};

}  // namespace gflow
