#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slk/matrix.hpp"

namespace slk {

struct ContingencyTable {
  std::size_t n_pred = 0;
  std::size_t n_true = 0;
  std::vector<std::size_t> counts;  // row-major n_pred x n_true
  std::vector<std::size_t> pred_totals;
  std::vector<std::size_t> true_totals;
  std::size_t n = 0;

  std::size_t at(std::size_t pred, std::size_t truth) const { return counts[pred * n_true + truth]; }

  static ContingencyTable build(std::span<const int> pred, std::span<const int> truth);
};

// Mutual information over sqrt(H(pred) H(truth)), natural logs. Two
// single-cluster partitions score 1; a single-cluster side facing a
// non-trivial one scores 0.
double nmi(std::span<const int> pred, std::span<const int> truth);
double nmi(const ContingencyTable& table);

// Optimal one-to-one cluster -> class mapping; the table is zero-padded to a
// square before solving.
double accuracy_hungarian(std::span<const int> pred, std::span<const int> truth);

// Minimum-cost assignment for an n x m cost matrix with n <= m. Returns the
// column chosen for every row.
std::vector<std::size_t> hungarian_min_cost(const Matrix& cost);

struct TaskOutcome {
  std::size_t correct = 0;
  std::size_t total = 0;
};

struct AccuracySummary {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * population std / sqrt(n)
  std::size_t n_tasks = 0;
};

// Tasks with zero queries are skipped; returns nullopt if none remain.
// Throws InvalidArgument for an empty list.
std::optional<AccuracySummary> fewshot_accuracy(std::span<const TaskOutcome> tasks);
AccuracySummary summarize_accuracies(std::span<const double> accuracies);

}  // namespace slk
