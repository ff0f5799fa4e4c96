#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gflow/hh_general.hpp"
#include "gflow/lossy_graph.hpp"

namespace gflow {

// One reduced row of a two-sparse matrix: sign * g * (1_head - eta 1_tail)
// over the doubled vertex space [0, 2n).
struct ReducedRow {
  int tail = 0, head = 0;
  double eta = 1.0;
  double g = 1.0;  // |G_ee|
  int sign = 1;    // sign of G_ee
};

// A h = G Abar [h; -h]; eta <= W_A^2, max(|G|, 1/|G|) <= W_A. Throws on a
// zero row.
ReducedRow reduce_two_sparse_row(const TsEntry* ent, int nnz, int n);

struct TwoSparseReduction {
  int n = 0;
  std::vector<ReducedRow> rows;
};
TwoSparseReduction two_sparse_reduce(const TwoSparseMatrix& a);

// Heavy hitter on dynamic two-sparse matrices, plus the row-scaled
// heavy-hitter and sampler interfaces consumed by path-following setups.
class TwoSparseHh {
 public:
  struct Config {
    GeneralLossyHh::Config general;
    // sampler interface constants
    double c0 = 1e4;
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
  };

  TwoSparseHh(int n_cols, Config cfg);

  int insert(const TsEntry* ent, int nnz);  // returns row id
  void del(int i);
  void scale(int i, double b);  // row scale g_i <- b (signed allowed)
  void scale_tau(int i, double b);
  bool row_alive(int i) const;
  int live_rows() const { return gen_->live_edge_count(); }

  // exactly {i : |g_i (A h)_i| >= eps}; eps in (0,1)
  std::vector<int> query_heavy(const Vec& h, double eps);
  double norm_estimate(const Vec& h);

  // Sampler interface: q_e >= 1 rows enter deterministically with R_ee = 1,
  // the rest are drawn proportionally to q_e with unbiased weights.
  struct SampleResult {
    std::vector<std::pair<int, double>> r;  // sparse diagonal of R
    long draws = 0;
    long deterministic = 0;
    double q_sum = 0.0;
  };
  SampleResult sample(const Vec& h);
  std::pair<Vec, double> sample_weights(const Vec& h);

  double row_value(int i, const Vec& h) const;  // g_i (A h)_i signed
  Vec doubled(const Vec& h) const;              // [h; -h]
  BalancedHh::Stats stats() const { return gen_->stats(); }
  GeneralLossyHh& general() { return *gen_; }

 private:
  struct RowRec {
    ReducedRow red;
    double scale = 1.0;  // external g_i from Scale
    bool alive = false;
  };

  int n_;
  Config cfg_;
  Rng rng_;
  std::vector<RowRec> rows_;
  std::unique_ptr<GeneralLossyHh> gen_;
};

}  // namespace gflow
