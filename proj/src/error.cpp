#include "nfwaves/error.hpp"

namespace nfwaves {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::QuadratureFailed: return "QuadratureFailed";
    case ErrorCode::NotBistable: return "NotBistable";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::LostMonotonicity: return "LostMonotonicity";
    case ErrorCode::BadGuess: return "BadGuess";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::ComplexBranch: return "ComplexBranch";
    case ErrorCode::SymmetryViolated: return "SymmetryViolated";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::PoorFit: return "PoorFit";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace nfwaves
