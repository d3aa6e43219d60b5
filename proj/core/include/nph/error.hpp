#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nph {

enum class ErrorCode {
  InvalidArgument,
  NoEvents,
  ZeroVariance,
  DegenerateWeight,
  InvalidCorrelation,
  MonotoneLikelihood,
  TooFewEvents,
  ConstantTransform,
  InfeasibleDesign,
  Unreachable,
};

std::string_view to_string(ErrorCode code) noexcept;

// Raised by every library operation. The code tells callers whether the
// failure is bad input or a statistical degeneracy of otherwise valid data.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // True for failures caused by the data (no events, zero variance, ...)
  // rather than by malformed arguments or configuration.
  bool is_degenerate() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace nph
