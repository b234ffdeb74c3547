#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slk/matrix.hpp"

namespace slk {

// N x K row-stochastic assignment matrix with per-row clamps. Clamped rows
// are exact one-hot vectors and `set_row` refuses to touch them.
class SoftAssignment {
 public:
  SoftAssignment() = default;
  SoftAssignment(std::size_t n_points, std::size_t k);  // uniform rows
  explicit SoftAssignment(Matrix rows);                // validated

  static SoftAssignment one_hot(std::span<const int> labels, std::size_t k);

  std::size_t n_points() const noexcept { return rows_.rows(); }
  std::size_t k() const noexcept { return rows_.cols(); }

  std::span<const double> row(std::size_t p) const { return rows_.row(p); }
  const Matrix& matrix() const noexcept { return rows_; }

  void set_row(std::size_t p, std::span<const double> values);
  void clamp(std::size_t p, int cls);

  bool is_clamped(std::size_t p) const { return clamped_[p] != 0; }
  int clamp_class(std::size_t p) const { return clamp_class_[p]; }
  std::size_t clamped_count() const;

  // Row-wise argmax with ties going to the lowest index.
  std::vector<int> hard_labels() const;
  bool is_binary() const;

  // Throws InvalidArgument if any row leaves the simplex (tolerance 1e-9)
  // or a clamped row is not its one-hot.
  void validate() const;

 private:
  Matrix rows_;
  std::vector<std::uint8_t> clamped_;
  std::vector<int> clamp_class_;
};

// Lowest-index argmax of a row.
std::size_t argmax(std::span<const double> row);

}  // namespace slk
