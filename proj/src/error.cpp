#include "treerecon/error.hpp"

namespace treerecon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::BadTreeSpec: return "BadTreeSpec";
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::TreeTooLarge: return "TreeTooLarge";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::CenterSingularity: return "CenterSingularity";
  }
  return "Unknown";
}

bool is_validation(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::NumericalUnderflow:
    case ErrorCode::CenterSingularity:
      return false;
    default:
      return true;
  }
}

}  // namespace treerecon
