#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxprob {

enum class ErrorCode {
  EmptyRange,
  DuplicateLabel,
  NegativeMass,
  SumOutOfTolerance,
  DimensionMismatch,
  NonFiniteParameter,
  RangeMismatch,
  NotSurjective,
  NonPositiveAlpha,
  NegativeAlphaOnZeroMass,
  SpaceTooLarge,
  EmptyIntersectionSupport,
  OracleSupportEscapesModel,
  NonFiniteEncountered,
  NonFiniteLogits,
  LabelOutOfRange,
  InvalidArgument,
  FileNotFound,
  ParseError,
};

std::string_view code_name(ErrorCode code) noexcept;

// Domain error carrying a machine-readable code. The CLI maps these to
// exit status 1 and {"error": code_name, "detail": what()} on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace maxprob
