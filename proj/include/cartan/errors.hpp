#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartan {

enum class ErrorCode {
  OutOfDomain,
  MetricDegenerate,
  StepTooLarge,
  DimensionMismatch,
  SingularLinearPart,
  SingularFrame,
  EmptySample,
  NonOrthogonalLinearPart,
  NonClosedCurve,
  ToleranceAmbiguity,
  NoFixedPoint,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto a structured FAIL entry or an exit code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::MetricDegenerate: return "MetricDegenerate";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularLinearPart: return "SingularLinearPart";
    case ErrorCode::SingularFrame: return "SingularFrame";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NonOrthogonalLinearPart: return "NonOrthogonalLinearPart";
    case ErrorCode::NonClosedCurve: return "NonClosedCurve";
    case ErrorCode::ToleranceAmbiguity: return "ToleranceAmbiguity";
    case ErrorCode::NoFixedPoint: return "NoFixedPoint";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace cartan
