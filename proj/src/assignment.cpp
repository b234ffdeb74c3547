#include "slk/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "slk/error.hpp"

namespace slk {

namespace {
constexpr double kSimplexTol = 1e-9;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

SoftAssignment::SoftAssignment(std::size_t n_points, std::size_t k)
    : rows_(n_points, k, k == 0 ? 0.0 : 1.0 / static_cast<double>(k)),
      clamped_(n_points, 0),
      clamp_class_(n_points, -1) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "assignment needs k >= 1");
}

SoftAssignment::SoftAssignment(Matrix rows)
    : rows_(std::move(rows)), clamped_(rows_.rows(), 0), clamp_class_(rows_.rows(), -1) {
  if (rows_.cols() == 0) throw Error(ErrorCode::InvalidArgument, "assignment needs k >= 1");
  validate();
}

SoftAssignment SoftAssignment::one_hot(std::span<const int> labels, std::size_t k) {
  Matrix m(labels.size(), k, 0.0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] < 0 || static_cast<std::size_t>(labels[p]) >= k)
      throw Error(ErrorCode::IndexOutOfRange, "label outside [0, k)", p);
    m(p, static_cast<std::size_t>(labels[p])) = 1.0;
  }
  return SoftAssignment(std::move(m));
}

void SoftAssignment::set_row(std::size_t p, std::span<const double> values) {
  if (clamped_[p]) throw Error(ErrorCode::InvalidArgument, "cannot modify a clamped row", p);
  std::copy(values.begin(), values.end(), rows_.row(p).begin());
}

void SoftAssignment::clamp(std::size_t p, int cls) {
  if (p >= n_points()) throw Error(ErrorCode::IndexOutOfRange, "clamp index out of range", p);
  if (cls < 0 || static_cast<std::size_t>(cls) >= k())
    throw Error(ErrorCode::IndexOutOfRange, "clamp class outside [0, k)", p);
  auto r = rows_.row(p);
  std::fill(r.begin(), r.end(), 0.0);
  r[static_cast<std::size_t>(cls)] = 1.0;
  clamped_[p] = 1;
  clamp_class_[p] = cls;
}

std::size_t SoftAssignment::clamped_count() const {
  return static_cast<std::size_t>(std::count(clamped_.begin(), clamped_.end(), std::uint8_t{1}));
}

std::vector<int> SoftAssignment::hard_labels() const {
  std::vector<int> labels(n_points());
  for (std::size_t p = 0; p < n_points(); ++p) labels[p] = static_cast<int>(argmax(row(p)));
  return labels;
}

bool SoftAssignment::is_binary() const {
  for (double v : rows_.values())
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

void SoftAssignment::validate() const {
  for (std::size_t p = 0; p < n_points(); ++p) {
    const auto r = row(p);
    double sum = 0.0;
    for (double v : r) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument, "assignment entry outside [0, 1]", p);
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
      throw Error(ErrorCode::InvalidArgument, "assignment row does not sum to 1", p);
    if (clamped_[p]) {
      for (std::size_t k = 0; k < r.size(); ++k)
        if (r[k] != (static_cast<int>(k) == clamp_class_[p] ? 1.0 : 0.0))
          throw Error(ErrorCode::InvalidArgument, "clamped row is not one-hot", p);
    }
  }
}

}  // namespace slk
