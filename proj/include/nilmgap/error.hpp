#pragma once

#include <stdexcept>
#include <string>

namespace nilmgap {

// Failure taxonomy shared across the toolkit. Every thrown error carries one
// of these codes so callers (and the CLI) can react without string matching.
enum class ErrorCode {
  kEmptySeries,
  kUnorderedInput,
  kNoOverlap,
  kSplitTooSmall,
  kSyntaxError,
  kDuplicateName,
  kMissingKey,
  kIoError,
  kInfeasibleNoise,
  kIncompatiblePowerTypes,
  kDegenerateAggregate,
  kGridMismatch,
  kDegenerateTruth,
  kSearchSpaceTooLarge,
  kShapeError,
  kNonFiniteValue,
  kTrainingDiverged,
  kWindowTooLong,
  kUnknownAppliance,
  kUnpairedScenario,
  kInvalidArgument,
};

constexpr const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kUnorderedInput: return "UnorderedInput";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kSplitTooSmall: return "SplitTooSmall";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInfeasibleNoise: return "InfeasibleNoise";
    case ErrorCode::kIncompatiblePowerTypes: return "IncompatiblePowerTypes";
    case ErrorCode::kDegenerateAggregate: return "DegenerateAggregate";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kDegenerateTruth: return "DegenerateTruth";
    case ErrorCode::kSearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kUnknownAppliance: return "UnknownAppliance";
    case ErrorCode::kUnpairedScenario: return "UnpairedScenario";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nilmgap
