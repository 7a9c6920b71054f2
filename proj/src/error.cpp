#include "maxprob/error.hpp"

namespace maxprob {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::SumOutOfTolerance: return "SumOutOfTolerance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::RangeMismatch: return "RangeMismatch";
    case ErrorCode::NotSurjective: return "NotSurjective";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::NegativeAlphaOnZeroMass: return "NegativeAlphaOnZeroMass";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::EmptyIntersectionSupport: return "EmptyIntersectionSupport";
    case ErrorCode::OracleSupportEscapesModel: return "OracleSupportEscapesModel";
    case ErrorCode::NonFiniteEncountered: return "NonFiniteEncountered";
    case ErrorCode::NonFiniteLogits: return "NonFiniteLogits";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace maxprob
