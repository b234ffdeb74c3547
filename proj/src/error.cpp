#include "slk/error.hpp"

namespace slk {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonRectangular: return "NonRectangular";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MissingSupportClass: return "MissingSupportClass";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OverlappingIndices: return "OverlappingIndices";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> row,
                     std::optional<std::size_t> col) {
  std::string out = to_string(code);
  if (row || col) {
    out += "(";
    if (row) out += "row=" + std::to_string(*row);
    if (row && col) out += ", ";
    if (col) out += "col=" + std::to_string(*col);
    out += ")";
  }
  out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> row, std::optional<std::size_t> col)
    : std::runtime_error(decorate(code, message, row, col)),
      code_(code),
      row_(row),
      col_(col) {}

}  // namespace slk
