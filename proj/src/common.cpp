#include "expander/common.hpp"

namespace expander {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InadmissibleType: return "InadmissibleType";
    case ErrorCode::NonEvenDegree: return "NonEvenDegree";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
    case ErrorCode::DegenerateRadius: return "DegenerateRadius";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::Undecided: return "Undecided";
    case ErrorCode::RegionViolation: return "RegionViolation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::NoAdmissiblePair: return "NoAdmissiblePair";
    case ErrorCode::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

}  // namespace expander
