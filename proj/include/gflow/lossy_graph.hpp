#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gflow/dense.hpp"

namespace gflow {

// Directed multi-edge with flow multiplier eta >= 1 and positive weight.
// Incidence row e is  1_{head} - eta_e * 1_{tail}.
struct LossyEdge {
  int tail = 0;
  int head = 0;
  double eta = 1.0;
  double weight = 1.0;
};

struct LossyGraph {
  int n = 0;
  std::vector<LossyEdge> edges;

  int m() const { return static_cast<int>(edges.size()); }
  // throws std::invalid_argument on self-loops, eta < 1 or weight <= 0
  void validate() const;
  double beta() const;  // max eta - 1
  bool unit_weights() const;
  bool connected() const;  // of the smoothed graph
};

// gamma-form ingestion: an edge (tail, head, gamma) stands for the row
// gamma * 1_head - 1_tail. Rows are normalized to multiplier form; the
// per-row scale/sign needed to translate results back is recorded.
struct GammaIngest {
  LossyGraph graph;
  std::vector<double> row_scale;  // gamma-row = row_sign * row_scale * (multiplier row)
  std::vector<int8_t> row_sign;
  std::vector<uint8_t> flipped;  // orientation swapped for gamma > 1
};
GammaIngest from_gamma(int n, const std::vector<LossyEdge>& gamma_edges);

// Assembled matrices and degree vectors for a lossy graph and its smoothed
// counterpart. Immutable after construction.
struct LaplacianView {
  const LossyGraph* g = nullptr;
  Vec d_lossy;   // d_G = diag(B^T W B)
  Vec d_smooth;  // smoothed degrees
  bool degenerate_degree = false;  // some vertex has no incident edge
  std::vector<int> isolated;

  Mat incidence() const;          // m x n dense
  Mat laplacian() const;          // B^T W B
  Mat laplacian_smooth() const;
  Mat normalized() const;         // D_G^{-1/2} L_G D_G^{-1/2}
  Mat normalized_smooth() const;
  // y = (D^{-1/2} L_G D^{-1/2} + eps_ad I) x for a degree proxy d
  void apply_shifted_normalized(const Vec& d, double eps_ad, const double* x, double* y) const;
  // v^T (D^{-1/2} L_G D^{-1/2} + eps_ad I) v
  double shifted_rayleigh(const Vec& d, double eps_ad, const Vec& v) const;
};

LaplacianView build_incidence(const LossyGraph& g);

// im_G(f) = B_G^T f
Vec imbalance(const LossyGraph& g, const Vec& f);

// Row-sparse matrix with at most two stored nonzeros per row.
struct TsEntry {
  int col = 0;
  double val = 0.0;
};

class TwoSparseMatrix {
 public:
  TwoSparseMatrix() = default;
  explicit TwoSparseMatrix(int cols) : cols_(cols) {}

  int rows() const { return static_cast<int>(nnz_.size()); }
  int cols() const { return cols_; }
  // merges duplicate columns and drops zeros; throws if >2 distinct columns
  int add_row(std::span<const TsEntry> entries);
  int row_nnz(int r) const { return nnz_[r]; }
  const TsEntry* row(int r) const { return &ent_[2 * static_cast<size_t>(r)]; }

  Vec matvec(const Vec& h) const;             // A h
  Vec matvec_t(const Vec& y) const;           // A^T y
  double row_dot(int r, const Vec& h) const;  // (A h)_r
  double magnitude_bound() const;             // W_A; 1.0 for the all-zero matrix
  // A^T diag(w) A as a dense cols x cols matrix (w may be empty)
  Mat gram(const Vec& w) const;
  Mat dense() const;

 private:
  int cols_ = 0;
  std::vector<TsEntry> ent_;  // 2 slots per row
  std::vector<int8_t> nnz_;
};

}  // namespace gflow
