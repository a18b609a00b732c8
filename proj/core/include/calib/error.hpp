#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calib {

// Machine-readable failure categories. User-facing code (the CLI) maps
// these to exit codes and diagnostics; library code throws and never
// prints.
enum class ErrorCode {
  NonFiniteLogit,
  LabelOutOfRange,
  ShapeMismatch,
  InvalidTemperature,
  InvalidTaxonomy,
  InvalidCostMatrix,
  EmptySubset,
  EmptyCalibrationSubset,
  EmptyRegion,
  EmptySplit,
  IncompatibleSelector,
  ClassAbsentFromLabels,
  DegenerateCosts,
  InvalidArgument,
  ParseError,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteLogit: return "NonFiniteLogit";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::InvalidTaxonomy: return "InvalidTaxonomy";
    case ErrorCode::InvalidCostMatrix: return "InvalidCostMatrix";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::EmptyCalibrationSubset: return "EmptyCalibrationSubset";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::IncompatibleSelector: return "IncompatibleSelector";
    case ErrorCode::ClassAbsentFromLabels: return "ClassAbsentFromLabels";
    case ErrorCode::DegenerateCosts: return "DegenerateCosts";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type for every structured failure in the library.
// `row`/`col`/`line` are -1 when not applicable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, long row = -1, long col = -1,
        long line = -1)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code),
        row_(row),
        col_(col),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  long row() const noexcept { return row_; }
  long col() const noexcept { return col_; }
  long line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  long row_;
  long col_;
  long line_;
};

}  // namespace calib
