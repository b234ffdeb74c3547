#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slk/matrix.hpp"

namespace slk {

// N x d matrix of input points. Construction rejects empty shapes and
// non-finite values, so every instance satisfies its invariants.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t n_points, std::size_t n_dims, std::vector<double> values);
  explicit FeatureMatrix(Matrix values);

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n_points() const noexcept { return values_.rows(); }
  std::size_t n_dims() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t p) const { return values_.row(p); }
  const Matrix& matrix() const noexcept { return values_; }

  // Rows `indices` in the given order.
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  void validate() const;
  Matrix values_;
};

using LabelVector = std::vector<int>;

}  // namespace slk
