#include "slk/task.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "slk/error.hpp"

namespace slk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class Int>
Int parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::Parse, "bad integer '" + std::string(s) + "' in task file", line);
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::size_t TaskSpec::shots_of(int cls) const {
  return static_cast<std::size_t>(std::count_if(
      support.begin(), support.end(), [cls](const SupportSample& s) { return s.cls == cls; }));
}

void TaskSpec::validate(std::optional<std::size_t> n_points) const {
  if (k_way == 0) throw Error(ErrorCode::InvalidArgument, "k_way must be >= 1");
  std::vector<std::size_t> per_class(k_way, 0);
  std::unordered_set<std::size_t> support_points;
  for (const auto& s : support) {
    if (s.cls < 0 || static_cast<std::size_t>(s.cls) >= k_way)
      throw Error(ErrorCode::IndexOutOfRange,
                  "support class " + std::to_string(s.cls) + " outside [0, k_way)");
    if (n_points && s.point >= *n_points)
      throw Error(ErrorCode::IndexOutOfRange, "support index " + std::to_string(s.point) +
                                                  " >= n_points " + std::to_string(*n_points));
    if (!support_points.insert(s.point).second)
      throw Error(ErrorCode::OverlappingIndices,
                  "support index " + std::to_string(s.point) + " listed twice");
    ++per_class[static_cast<std::size_t>(s.cls)];
  }
  for (std::size_t k = 0; k < k_way; ++k)
    if (per_class[k] == 0)
      throw Error(ErrorCode::MissingSupportClass,
                  "class " + std::to_string(k) + " has no support sample");
  std::unordered_set<std::size_t> query_points;
  for (std::size_t q : queries) {
    if (n_points && q >= *n_points)
      throw Error(ErrorCode::IndexOutOfRange,
                  "query index " + std::to_string(q) + " >= n_points " + std::to_string(*n_points));
    if (support_points.count(q))
      throw Error(ErrorCode::OverlappingIndices,
                  "index " + std::to_string(q) + " is both support and query");
    if (!query_points.insert(q).second)
      throw Error(ErrorCode::OverlappingIndices, "query index " + std::to_string(q) + " listed twice");
  }
}

TaskSpec parse_task(std::string_view text, std::optional<std::size_t> n_points) {
  TaskSpec task;
  bool saw_kway = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::Parse, "expected key=value in task file", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = line.substr(eq + 1);
    if (key == "kway") {
      task.k_way = parse_int<std::size_t>(value, line_no);
      saw_kway = true;
    } else if (key == "support") {
      for (auto item : split(value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos)
          throw Error(ErrorCode::Parse, "support entry must be idx:class", line_no);
        task.support.push_back({parse_int<std::size_t>(item.substr(0, colon), line_no),
                                parse_int<int>(item.substr(colon + 1), line_no)});
      }
    } else if (key == "query") {
      for (auto item : split(value, ',')) task.queries.push_back(parse_int<std::size_t>(item, line_no));
    } else {
      throw Error(ErrorCode::Parse, "unknown task key '" + std::string(key) + "'", line_no);
    }
  }
  if (!saw_kway) throw Error(ErrorCode::Parse, "task file has no kway line");
  task.validate(n_points);
  return task;
}

std::string format_task(const TaskSpec& task) {
  std::string out = "kway=" + std::to_string(task.k_way) + "\nsupport=";
  for (std::size_t i = 0; i < task.support.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(task.support[i].point) + ":" + std::to_string(task.support[i].cls);
  }
  out += "\nquery=";
  for (std::size_t i = 0; i < task.queries.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(task.queries[i]);
  }
  out += '\n';
  return out;
}

}  // namespace slk
