#include "entrywise/errors.hpp"

namespace entrywise {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroFunctional: return "ZeroFunctional";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SamePair: return "SamePair";
    case ErrorCode::StatusMismatch: return "StatusMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::NotOverdetermined: return "NotOverdetermined";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace entrywise
