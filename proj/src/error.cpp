#include "condkit/error.hpp"

namespace condkit {

std::string_view errorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::DegenerateRadius: return "DegenerateRadius";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::EmptyDepth: return "EmptyDepth";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::NotInfilled: return "NotInfilled";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::FovOutOfRange: return "FovOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnfilledPlan: return "UnfilledPlan";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::GuidanceFailure: return "GuidanceFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::ExternalUnavailable: return "ExternalUnavailable";
    case ErrorCode::ParseFailure: return "ParseFailure";
  }
  return "Unknown";
}

}  // namespace condkit
