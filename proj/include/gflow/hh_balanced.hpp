#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gflow/hh_expander.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// Multi-level edge-disjoint expander decomposition of a balanced lossy graph
// with insertions and deletions, driving one ExpanderHh per subgraph.
class BalancedHh {
 public:
  struct Config {
    double eps_ad = 1e-8;
    double phi = 0.02;        // working expansion parameter of the hierarchy
    double beta = 1e-4;       // inserted multipliers must lie in [1, 1+beta]
    uint64_t seed = 1;
    int dense_cap = 400;      // dense eigensolves allowed up to this size
    bool debug_checks = false;
  };

  struct Stats {
    long rebuilds = 0;
    long subgraph_destructs = 0;
    long prune_rebuild_signals = 0;
    long resets_query = 0;      // summed over destroyed subgraph structures
    long resets_delete = 0;
    long renorm_violations = 0;
    long jl_checks = 0, jl_violations_102 = 0;
    long candidate_work = 0, filter_evals = 0;
    long max_resets_query_one_ds = 0;
    long max_resets_delete_one_ds = 0;
    bool counter_bound_ok = true;  // m_cnt <= 7 * delete-calls per subgraph
  };

  BalancedHh(int n, Config cfg);

  // stable edge id; eta must lie in [1, 1+beta]
  int insert(int a, int b, double eta, double tau = 0.0);
  void del(int e);
  void scale_tau(int e, double b);
  bool edge_alive(int e) const;
  int live_edge_count() const { return m_live_; }

  std::vector<int> query_heavy(const Vec& h, double eps);
  double norm_estimate(const Vec& h);
  std::vector<std::pair<int, double>> sample(const Vec& h, double c0, double c1b, double c2b,
                                             double c3);
  std::pair<Vec, double> sample_weights(const Vec& h, double c1b, double c2b, double c3);

  double row_value(int e, const Vec& h) const;
  const LossyEdge& edge(int e) const { return edges_[e].data; }
  Stats stats() const;  // includes live subgraph counters
  // Lemma-6.5 style structural invariants; throws on violation (tests)
  void check_invariants() const;

 private:
  struct EdgeRec {
    LossyEdge data;
    double tau = 0.0;
    bool alive = false;
    int level = -1, sub = -1, local = -1;  // position in the decomposition
  };

  struct Subgraph {
    int self = -1;                        // index in subs_
    uint64_t gen = 0;                     // bumped on every slot reuse
    std::vector<int> edge_ids;            // balanced ids; parallel to ds local ids
    std::vector<int> verts;               // global vertex ids
    std::unordered_map<int, int> vid;     // global -> local
    std::unique_ptr<ExpanderHh> ds;
    std::vector<int> deg_cur;             // live local degrees (bookkeeping graph)
    std::vector<double> deg_init;
    long m_init = 0, m_cnt = 0, delete_calls = 0;
    double cert_phi = 0.0;
    // pruning state
    std::vector<char> pruned;
    double vol_pruned = 0.0, cut_pruned = 0.0;
    long k_del = 0, deleted_since_cert = 0;
    bool alive = false;
    std::vector<int> pending_local_del;  // ds deletions queued within one del()
  };

  struct Level {
    std::vector<int> subs;  // indices into subs_
    long live_edges = 0;
  };

  int alloc_subgraph();
  void ensure_levels(size_t count);
  void rebuild(int level);
  void insert_internal(int edge_id);
  // returns (f_exp, f_prime_exp) as balanced edge ids, or rebuild signal
  bool expander_prune(Subgraph& s, const std::vector<int>& f, std::vector<int>* f_exp,
                      std::vector<int>* f_prime);
  std::vector<int> degree_prune(Subgraph& s, const std::vector<int>& f);
  void remove_from_subgraph(Subgraph& s, int edge_id);
  void destruct_subgraph(int subidx);
  void absorb_ds_stats(const ExpanderHh& ds);
  double certify_survivor(Subgraph& s) const;

  int n_;
  Config cfg_;
  Rng rng_;
  std::vector<EdgeRec> edges_;
  std::vector<Subgraph> subs_;
  std::vector<int> free_subs_;
  std::vector<Level> levels_;
  int m_live_ = 0;
  mutable Stats retired_;  // counters of destroyed subgraphs
};

}  // namespace gflow
