#include "slk/matrix.hpp"

#include <stdexcept>
#include <utility>

namespace slk {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_)
    throw std::invalid_argument("matrix buffer size does not match shape");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace slk
