#include "slk/features.hpp"

#include <cmath>
#include <utility>

#include "slk/error.hpp"

namespace slk {

FeatureMatrix::FeatureMatrix(std::size_t n_points, std::size_t n_dims, std::vector<double> values)
    : FeatureMatrix(Matrix(n_points, n_dims, [&] {
        if (values.size() != n_points * n_dims)
          throw Error(ErrorCode::NonRectangular, "value count does not equal n_points * n_dims");
        return std::move(values);
      }())) {}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) { validate(); }

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "feature matrix needs at least one row");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p].size() != d)
      throw Error(ErrorCode::NonRectangular, "row length differs from first row", p);
    flat.insert(flat.end(), rows[p].begin(), rows[p].end());
  }
  return FeatureMatrix(rows.size(), d, std::move(flat));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), n_dims());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n_points())
      throw Error(ErrorCode::IndexOutOfRange, "row index " + std::to_string(indices[i]) +
                                                  " >= n_points " + std::to_string(n_points()));
    const auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return FeatureMatrix(std::move(out));
}

void FeatureMatrix::validate() const {
  if (values_.rows() == 0 || values_.cols() == 0)
    throw Error(ErrorCode::InvalidArgument, "feature matrix must have n_points >= 1 and n_dims >= 1");
  for (std::size_t p = 0; p < values_.rows(); ++p) {
    const auto r = values_.row(p);
    for (std::size_t j = 0; j < r.size(); ++j)
      if (!std::isfinite(r[j])) throw Error(ErrorCode::NonFiniteValue, "non-finite feature value", p, j);
  }
}

}  // namespace slk
