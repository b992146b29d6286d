#include "groundmem/error.hpp"

#include <cstdio>

namespace groundmem {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedFrameId: return "MalformedFrameId";
    case ErrorCode::UnparsableOutput: return "UnparsableOutput";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::MalformedRagCount: return "MalformedRagCount";
    case ErrorCode::VerdictCountMismatch: return "VerdictCountMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NonRetryableStatus: return "NonRetryableStatus";
    case ErrorCode::MockKeepViolation: return "MockKeepViolation";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ContinueWithoutActiveFrame: return "ContinueWithoutActiveFrame";
    case ErrorCode::AssumptionBudgetExceeded: return "AssumptionBudgetExceeded";
    case ErrorCode::CandidateGenerationFailed: return "CandidateGenerationFailed";
    case ErrorCode::UnknownFrame: return "UnknownFrame";
    case ErrorCode::UnallocatedFrame: return "UnallocatedFrame";
    case ErrorCode::MissingCanvas: return "MissingCanvas";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::PlanInvalid: return "PlanInvalid";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnknownRelationType: return "UnknownRelationType";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidTriplet: return "InvalidTriplet";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

std::string Error::tag() const {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "E%03d", static_cast<int>(code_));
  return std::string(buf) + " " + std::string(error_name(code_));
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace groundmem
