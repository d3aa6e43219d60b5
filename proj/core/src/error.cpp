#include "nph/error.hpp"

namespace nph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DegenerateWeight: return "DegenerateWeight";
    case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorCode::MonotoneLikelihood: return "MonotoneLikelihood";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::ConstantTransform: return "ConstantTransform";
    case ErrorCode::InfeasibleDesign: return "InfeasibleDesign";
    case ErrorCode::Unreachable: return "Unreachable";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool Error::is_degenerate() const noexcept {
  switch (code_) {
    case ErrorCode::NoEvents:
    case ErrorCode::ZeroVariance:
    case ErrorCode::DegenerateWeight:
    case ErrorCode::MonotoneLikelihood:
    case ErrorCode::TooFewEvents:
    case ErrorCode::ConstantTransform:
    case ErrorCode::Unreachable:
      return true;
    default:
      return false;
  }
}

}  // namespace nph
