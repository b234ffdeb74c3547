#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "slk/assignment.hpp"
#include "slk/features.hpp"
#include "slk/task.hpp"

namespace slk {

enum class FeatureFormat { Csv, SlkBin };

FeatureFormat parse_feature_format(std::string_view name);
// Guesses from the extension: ".slkb"/".slkbin" is binary, anything else CSV.
FeatureFormat format_from_path(const std::filesystem::path& path);

struct CsvOptions {
  bool has_header = false;
};

// slkbin layout: "SLKB", u32 version (1), u64 n_points, u64 n_dims, then
// n_points*n_dims little-endian f64 values, row-major.
inline constexpr char kSlkBinMagic[4] = {'S', 'L', 'K', 'B'};
inline constexpr std::uint32_t kSlkBinVersion = 1;

FeatureMatrix parse_features_csv(std::string_view text, const CsvOptions& options = {});
FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format,
                            const CsvOptions& options = {});
void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FeatureFormat format);

LabelVector parse_labels(std::string_view text);
LabelVector load_labels(const std::filesystem::path& path);
void save_labels(std::span<const int> labels, const std::filesystem::path& path);

TaskSpec load_task(const std::filesystem::path& path,
                   std::optional<std::size_t> n_points = std::nullopt);
void save_task(const TaskSpec& task, const std::filesystem::path& path);

struct AssignmentOutput {
  bool write_soft = false;
  // Rows to emit and the point ids written for them; all rows when empty
  // and `use_subset` is false.
  bool use_subset = false;
  std::span<const std::size_t> subset;
};

// CSV with header `point,label` (plus `s_0..s_{K-1}` when soft rows are
// requested). Labels are the lowest-index row argmax.
std::string format_assignments(const SoftAssignment& assignment, const AssignmentOutput& out = {});
void save_assignments(const SoftAssignment& assignment, const std::filesystem::path& path,
                      const AssignmentOutput& out = {});

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace slk
