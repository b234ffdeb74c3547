#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slk {

struct SupportSample {
  std::size_t point = 0;
  int cls = 0;
  friend bool operator==(const SupportSample&, const SupportSample&) = default;
};

// One K-way few-shot episode over a shared feature matrix.
struct TaskSpec {
  std::size_t k_way = 0;
  std::vector<SupportSample> support;
  std::vector<std::size_t> queries;

  // Every class has a support sample, supports and queries are disjoint and
  // free of duplicates, and (when n_points is given) every index is in range.
  void validate(std::optional<std::size_t> n_points = std::nullopt) const;

  std::size_t shots_of(int cls) const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// Text form: `kway=K`, `support=idx:class,...`, `query=idx,...`.
TaskSpec parse_task(std::string_view text, std::optional<std::size_t> n_points = std::nullopt);
std::string format_task(const TaskSpec& task);

}  // namespace slk
