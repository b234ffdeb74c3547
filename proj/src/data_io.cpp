#include "slk/data_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slk/error.hpp"

namespace slk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits into lines, dropping the trailing empty line of a final newline.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto eol = text.find('\n', start);
    if (eol == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, eol - start));
    start = eol + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

template <class T>
void put_le(std::string& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class T>
T get_le(std::string_view& in) {
  if (in.size() < sizeof(T)) throw Error(ErrorCode::MalformedHeader, "slkbin file truncated");
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), in.data(), sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  in.remove_prefix(sizeof(T));
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

FeatureMatrix parse_slkbin(std::string_view in) {
  if (in.size() < 4 || std::memcmp(in.data(), kSlkBinMagic, 4) != 0)
    throw Error(ErrorCode::MalformedHeader, "missing SLKB magic");
  in.remove_prefix(4);
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSlkBinVersion)
    throw Error(ErrorCode::MalformedHeader, "unsupported slkbin version " + std::to_string(version));
  const auto n = get_le<std::uint64_t>(in);
  const auto d = get_le<std::uint64_t>(in);
  if (n == 0 || d == 0) throw Error(ErrorCode::MalformedHeader, "slkbin shape has a zero extent");
  if (d > in.size() / 8 / n || in.size() != n * d * 8)
    throw Error(ErrorCode::MalformedHeader, "slkbin payload size does not match header shape");
  std::vector<double> values(n * d);
  for (auto& v : values) v = get_le<double>(in);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::NonFiniteValue, "non-finite feature value", i / d, i % d);
  return FeatureMatrix(n, d, std::move(values));
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

FeatureFormat parse_feature_format(std::string_view name) {
  if (name == "csv") return FeatureFormat::Csv;
  if (name == "slkbin") return FeatureFormat::SlkBin;
  throw Error(ErrorCode::Config, "unknown feature format '" + std::string(name) + "'");
}

FeatureFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".slkb" || ext == ".slkbin") ? FeatureFormat::SlkBin : FeatureFormat::Csv;
}

FeatureMatrix parse_features_csv(std::string_view text, const CsvOptions& options) {
  auto lines = split_lines(text);
  std::size_t first = 0;
  if (options.has_header) {
    if (lines.empty()) throw Error(ErrorCode::MalformedHeader, "CSV header expected");
    first = 1;
  }
  std::vector<double> values;
  std::size_t n_dims = 0;
  std::size_t n_rows = 0;
  for (std::size_t li = first; li < lines.size(); ++li) {
    const std::size_t row = li - first;
    std::string_view line = lines[li];
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto field =
          trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ptr != field.data() + field.size() ||
          (ec != std::errc() && ec != std::errc::result_out_of_range))
        throw Error(ErrorCode::Parse, "cannot parse '" + std::string(field) + "' as a number", row, cols);
      if (ec == std::errc::result_out_of_range || !std::isfinite(v))
        throw Error(ErrorCode::NonFiniteValue, "non-finite feature value", row, cols);
      values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row == 0) n_dims = cols;
    else if (cols != n_dims)
      throw Error(ErrorCode::NonRectangular,
                  "row has " + std::to_string(cols) + " columns, expected " + std::to_string(n_dims), row);
    ++n_rows;
  }
  if (n_rows == 0) throw Error(ErrorCode::Parse, "CSV contains no data rows");
  return FeatureMatrix(n_rows, n_dims, std::move(values));
}

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format,
                            const CsvOptions& options) {
  const auto text = read_text_file(path);
  return format == FeatureFormat::Csv ? parse_features_csv(text, options) : parse_slkbin(text);
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FeatureFormat format) {
  std::string out;
  if (format == FeatureFormat::SlkBin) {
    out.reserve(24 + features.n_points() * features.n_dims() * 8);
    out.append(kSlkBinMagic, 4);
    put_le<std::uint32_t>(out, kSlkBinVersion);
    put_le<std::uint64_t>(out, features.n_points());
    put_le<std::uint64_t>(out, features.n_dims());
    for (double v : features.matrix().values()) put_le<double>(out, v);
  } else {
    for (std::size_t p = 0; p < features.n_points(); ++p) {
      const auto r = features.row(p);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (j) out += ',';
        out += format_double(r[j]);
      }
      out += '\n';
    }
  }
  write_text_file(path, out);
}

LabelVector parse_labels(std::string_view text) {
  LabelVector labels;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto field = trim(lines[i]);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
      throw Error(ErrorCode::Parse, "cannot parse label '" + std::string(field) + "'", i);
    if (v < 0) throw Error(ErrorCode::IndexOutOfRange, "labels must be non-negative", i);
    labels.push_back(v);
  }
  return labels;
}

LabelVector load_labels(const std::filesystem::path& path) { return parse_labels(read_text_file(path)); }

void save_labels(std::span<const int> labels, const std::filesystem::path& path) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + '\n';
  write_text_file(path, out);
}

TaskSpec load_task(const std::filesystem::path& path, std::optional<std::size_t> n_points) {
  return parse_task(read_text_file(path), n_points);
}

void save_task(const TaskSpec& task, const std::filesystem::path& path) {
  write_text_file(path, format_task(task));
}

std::string format_assignments(const SoftAssignment& assignment, const AssignmentOutput& out) {
  std::string text = "point,label";
  if (out.write_soft)
    for (std::size_t k = 0; k < assignment.k(); ++k) text += ",s_" + std::to_string(k);
  text += '\n';
  auto emit = [&](std::size_t p) {
    const auto r = assignment.row(p);
    text += std::to_string(p) + ',' + std::to_string(argmax(r));
    if (out.write_soft)
      for (double v : r) text += ',' + format_double(v);
    text += '\n';
  };
  if (out.use_subset) {
    for (std::size_t p : out.subset) {
      if (p >= assignment.n_points()) throw Error(ErrorCode::IndexOutOfRange, "assignment row out of range", p);
      emit(p);
    }
  } else {
    for (std::size_t p = 0; p < assignment.n_points(); ++p) emit(p);
  }
  return text;
}

void save_assignments(const SoftAssignment& assignment, const std::filesystem::path& path,
                      const AssignmentOutput& out) {
  write_text_file(path, format_assignments(assignment, out));
}

}  // namespace slk
