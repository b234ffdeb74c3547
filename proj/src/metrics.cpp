#include "slk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slk/error.hpp"

namespace slk {

ContingencyTable ContingencyTable::build(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ (" +
                                               std::to_string(pred.size()) + " vs " +
                                               std::to_string(truth.size()) + ")");
  if (pred.empty()) throw Error(ErrorCode::InvalidArgument, "metrics need at least one point");
  ContingencyTable t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0) throw Error(ErrorCode::IndexOutOfRange, "negative label", i);
    t.n_pred = std::max(t.n_pred, static_cast<std::size_t>(pred[i]) + 1);
    t.n_true = std::max(t.n_true, static_cast<std::size_t>(truth[i]) + 1);
  }
  t.counts.assign(t.n_pred * t.n_true, 0);
  t.pred_totals.assign(t.n_pred, 0);
  t.true_totals.assign(t.n_true, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = static_cast<std::size_t>(pred[i]);
    const auto q = static_cast<std::size_t>(truth[i]);
    ++t.counts[p * t.n_true + q];
    ++t.pred_totals[p];
    ++t.true_totals[q];
  }
  t.n = pred.size();
  return t;
}

namespace {

double entropy(std::span<const std::size_t> totals, double n) {
  double h = 0.0;
  for (std::size_t c : totals)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return h;
}

}  // namespace

double nmi(const ContingencyTable& table) {
  const double n = static_cast<double>(table.n);
  const double h_pred = entropy(table.pred_totals, n);
  const double h_true = entropy(table.true_totals, n);
  if (h_pred == 0.0 && h_true == 0.0) return 1.0;
  if (h_pred == 0.0 || h_true == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < table.n_pred; ++i)
    for (std::size_t j = 0; j < table.n_true; ++j) {
      const std::size_t c = table.at(i, j);
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / n;
      mi += pij * std::log(static_cast<double>(c) * n /
                           (static_cast<double>(table.pred_totals[i]) * static_cast<double>(table.true_totals[j])));
    }
  return std::clamp(mi / std::sqrt(h_pred * h_true), 0.0, 1.0);
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  return nmi(ContingencyTable::build(pred, truth));
}

// Shortest augmenting path with row/column potentials, O(n^2 m).
std::vector<std::size_t> hungarian_min_cost(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (n > m) throw Error(ErrorCode::InvalidArgument, "hungarian solver needs rows <= cols");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based internally; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (owner[j] != 0) row_to_col[owner[j] - 1] = j - 1;
  return row_to_col;
}

double accuracy_hungarian(std::span<const int> pred, std::span<const int> truth) {
  const auto table = ContingencyTable::build(pred, truth);
  const std::size_t side = std::max(table.n_pred, table.n_true);
  Matrix cost(side, side, 0.0);
  for (std::size_t i = 0; i < table.n_pred; ++i)
    for (std::size_t j = 0; j < table.n_true; ++j) cost(i, j) = -static_cast<double>(table.at(i, j));
  const auto mapping = hungarian_min_cost(cost);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < table.n_pred; ++i)
    if (mapping[i] < table.n_true) matched += table.at(i, mapping[i]);
  return static_cast<double>(matched) / static_cast<double>(table.n);
}

AccuracySummary summarize_accuracies(std::span<const double> accuracies) {
  if (accuracies.empty()) throw Error(ErrorCode::InvalidArgument, "no task accuracies to summarize");
  const double n = static_cast<double>(accuracies.size());
  double mean = 0.0;
  for (double a : accuracies) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : accuracies) var += (a - mean) * (a - mean);
  var /= n;
  return {mean, 1.96 * std::sqrt(var) / std::sqrt(n), accuracies.size()};
}

std::optional<AccuracySummary> fewshot_accuracy(std::span<const TaskOutcome> tasks) {
  if (tasks.empty()) throw Error(ErrorCode::InvalidArgument, "fewshot_accuracy needs at least one task");
  std::vector<double> accuracies;
  for (const auto& t : tasks) {
    if (t.correct > t.total) throw Error(ErrorCode::InvalidArgument, "task has more correct than total");
    if (t.total > 0) accuracies.push_back(static_cast<double>(t.correct) / static_cast<double>(t.total));
  }
  if (accuracies.empty()) return std::nullopt;
  return summarize_accuracies(accuracies);
}

}  // namespace slk
