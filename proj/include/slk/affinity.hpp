#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slk/assignment.hpp"
#include "slk/features.hpp"

namespace slk {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;
};

// Sparse affinity graph in CSR form with cached degrees.
//
// Invariants checked on construction: no self-loops, finite non-negative
// weights, strictly increasing columns within a row, degrees equal to row
// sums, and w(p,q) == w(q,p) whenever `symmetric()` is true.
//
// The diagonal shift is bookkeeping only: it is never stored as an edge, but
// the optimizer treats the graph as W + shift * I.
class SparseAffinity {
 public:
  SparseAffinity() = default;
  SparseAffinity(std::size_t n_points, std::vector<std::size_t> row_offsets,
                 std::vector<std::uint32_t> col_indices, std::vector<double> weights,
                 bool symmetric, double diag_shift = 0.0);

  // Duplicate (row, col) pairs are rejected. `symmetric` is verified.
  static SparseAffinity from_triplets(std::size_t n_points, std::vector<Triplet> triplets,
                                      bool symmetric, double diag_shift = 0.0);
  static SparseAffinity empty(std::size_t n_points);

  std::size_t n_points() const noexcept { return n_points_; }
  std::size_t nnz() const noexcept { return weights_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::uint32_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> degrees() const noexcept { return degrees_; }

  std::span<const std::uint32_t> neighbors(std::size_t p) const {
    return {col_indices_.data() + row_offsets_[p], row_offsets_[p + 1] - row_offsets_[p]};
  }
  std::span<const double> neighbor_weights(std::size_t p) const {
    return {weights_.data() + row_offsets_[p], row_offsets_[p + 1] - row_offsets_[p]};
  }
  // Stored weight of (p, q), or 0 when absent.
  double weight(std::size_t p, std::size_t q) const;

  double diag_shift() const noexcept { return diag_shift_; }
  bool symmetric() const noexcept { return symmetric_; }
  double total_degree() const;

  SparseAffinity with_diag_shift(double delta) const;
  std::vector<Triplet> triplets() const;

 private:
  void validate() const;

  std::size_t n_points_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::uint32_t> col_indices_;
  std::vector<double> weights_;
  std::vector<double> degrees_;
  double diag_shift_ = 0.0;
  bool symmetric_ = true;
};

// rho nearest neighbours of every point under squared Euclidean distance,
// self excluded, sorted by (distance, index). Storage is n_points * rho.
struct NeighborLists {
  std::size_t n_points = 0;
  std::size_t rho = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> dist2;

  std::span<const std::uint32_t> of(std::size_t p) const { return {index.data() + p * rho, rho}; }
  std::span<const double> dist2_of(std::size_t p) const { return {dist2.data() + p * rho, rho}; }
};

// Exact search over all pairs, parallel over query rows.
NeighborLists knn_search(const FeatureMatrix& features, std::size_t rho);

// Directed binary rho-NN graph: w(p,q) = 1 iff q is among p's neighbours.
SparseAffinity knn_graph(const FeatureMatrix& features, std::size_t rho);
SparseAffinity knn_graph(const NeighborLists& neighbors);

enum class SymmetrizeMode { Max, Mean, None };
SymmetrizeMode parse_symmetrize_mode(std::string_view name);
std::string to_string(SymmetrizeMode mode);

SparseAffinity symmetrize(const SparseAffinity& graph, SymmetrizeMode mode);

struct KernelWidth {
  double sigma2;
  explicit KernelWidth(double value);
};

// sigma^2 = (1 / (N rho)) * sum_p sum_{q in N_p} ||x_p - x_q||^2.
KernelWidth estimate_sigma2(const FeatureMatrix& features, std::size_t rho);
KernelWidth estimate_sigma2(const NeighborLists& neighbors);

// sum over stored (p,q) of w(p,q) * ||s_p - s_q||^2.
double laplacian_quadratic(const SparseAffinity& graph, const Matrix& rows);
double laplacian_quadratic(const SparseAffinity& graph, const SoftAssignment& assignment);

// A shift that makes W + shift*I psd for any symmetric non-negative graph
// (Gershgorin bound: the largest degree).
double gershgorin_shift(const SparseAffinity& graph);

// Debug dump, one "p q w" line per stored edge.
std::string format_graph_triplets(const SparseAffinity& graph);
void save_graph_triplets(const SparseAffinity& graph, const std::filesystem::path& path);

}  // namespace slk
