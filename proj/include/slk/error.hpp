#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace slk {

enum class ErrorCode {
  Io,
  Parse,
  MalformedHeader,
  NonRectangular,
  NonFiniteValue,
  MissingSupportClass,
  IndexOutOfRange,
  OverlappingIndices,
  InvalidArgument,
  DegenerateData,
  EmptyCluster,
  ZeroVector,
  LengthMismatch,
  Config,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. Data-location errors carry the
// offending row (and column, for per-value problems).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> col = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> col() const noexcept { return col_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
};

}  // namespace slk
