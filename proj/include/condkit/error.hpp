#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace condkit {

// Every failure the library reports carries one of these codes. The CLI maps
// codes to exit statuses, so the numeric values are part of the tool's contract.
enum class ErrorCode : int {
  InvalidArgument = 2,
  InvalidRotation = 3,
  NonPositiveScale = 4,
  DegenerateRadius = 5,
  DegenerateScale = 6,
  DegenerateConfiguration = 7,
  EmptyDepth = 10,
  EmptyScene = 11,
  NotInfilled = 12,
  InsufficientOverlap = 13,
  SingularSystem = 14,
  ShapeMismatch = 15,
  FovOutOfRange = 20,
  IndexOutOfRange = 21,
  TargetTooLarge = 22,
  EmptyCandidates = 23,
  IoFailure = 30,
  InvalidScene = 31,
  ChecksumMismatch = 32,
  FormatError = 33,
  UnfilledPlan = 40,
  StepOutOfRange = 41,
  GuidanceFailure = 42,
  ConfigError = 43,
  TooSmall = 50,
  ExternalUnavailable = 51,
  ParseFailure = 52,
};

std::string_view errorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorName(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace condkit
