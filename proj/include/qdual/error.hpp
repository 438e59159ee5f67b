#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdual {

enum class ErrorCode {
  kDimensionMismatch,
  kSchema,
  kDualUndefined,
  kGradientUndefined,
  kNotInY0,
  kPreconditionFailed,
  kInitNotFound,
  kTooLarge,
  kEmptyFeasible,
  kUnrecognizedStructure,
  kNoFeasibleNeighbors,
  kUnknownCase,
  kInternal,
};

inline std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kDualUndefined: return "DualUndefined";
    case ErrorCode::kGradientUndefined: return "GradientUndefined";
    case ErrorCode::kNotInY0: return "NotInY0";
    case ErrorCode::kPreconditionFailed: return "PreconditionFailed";
    case ErrorCode::kInitNotFound: return "InitNotFound";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyFeasible: return "EmptyFeasible";
    case ErrorCode::kUnrecognizedStructure: return "UnrecognizedStructure";
    case ErrorCode::kNoFeasibleNeighbors: return "NoFeasibleNeighbors";
    case ErrorCode::kUnknownCase: return "UnknownCase";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qdual
