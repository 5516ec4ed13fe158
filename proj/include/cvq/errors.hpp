#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvq {

enum class ErrorCode {
  DimensionMismatch,
  PhysicalityViolation,
  IndexOutOfRange,
  DuplicateIndex,
  DuplicateLabel,
  NotAPermutation,
  NonPositiveDeterminant,
  InvalidArgument,
  RegisterMismatch,
  NonSymplectic,
  BadPolarization,
  NotCircular,
  UnpairedMode,
  AmbiguousPairing,
  NumericalFailure,
  ConvergenceStall,
  ParseError,
  ConventionMismatch,
  StepFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PhysicalityViolation: return "PhysicalityViolation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::NonPositiveDeterminant: return "NonPositiveDeterminant";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RegisterMismatch: return "RegisterMismatch";
    case ErrorCode::NonSymplectic: return "NonSymplectic";
    case ErrorCode::BadPolarization: return "BadPolarization";
    case ErrorCode::NotCircular: return "NotCircular";
    case ErrorCode::UnpairedMode: return "UnpairedMode";
    case ErrorCode::AmbiguousPairing: return "AmbiguousPairing";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ConvergenceStall: return "ConvergenceStall";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConventionMismatch: return "ConventionMismatch";
    case ErrorCode::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A pipeline step failed; wraps the underlying module error with the step index.
class StepError : public Error {
 public:
  StepError(std::size_t step, std::string step_name, const Error& cause)
      : Error(ErrorCode::StepFailure,
              "step " + std::to_string(step) + " (" + step_name + ") failed: " + cause.what()),
        step_(step),
        step_name_(std::move(step_name)),
        cause_(cause.code()) {}

  std::size_t step() const noexcept { return step_; }
  const std::string& step_name() const noexcept { return step_name_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::size_t step_;
  std::string step_name_;
  ErrorCode cause_;
};

}  // namespace cvq
