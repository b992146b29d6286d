#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundmem {

/// Every failure the engine reports is one of these. The numeric value is the
/// stable code printed by the CLI (`E<nnn>`), so append new codes at the end.
enum class ErrorCode {
  MalformedFrameId = 1,
  UnparsableOutput,
  UnknownAction,
  UnknownCommand,
  MalformedRagCount,
  VerdictCountMismatch,
  UnknownLabel,
  BackendUnreachable,
  Timeout,
  NonRetryableStatus,
  MockKeepViolation,
  DecodeError,
  EmptyInput,
  ContinueWithoutActiveFrame,
  AssumptionBudgetExceeded,
  CandidateGenerationFailed,
  UnknownFrame,
  UnallocatedFrame,
  MissingCanvas,
  EmptyBank,
  PlanInvalid,
  StepFailed,
  FormatError,
  UnknownRelationType,
  DegenerateData,
  PreconditionViolation,
  ConfigError,
  IoError,
  InvalidTriplet,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// "E002 UnparsableOutput"
  std::string tag() const;

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace groundmem
