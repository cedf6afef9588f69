#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace expander {

/// Planar state vector. Every system in this library is two-dimensional.
using Vec2 = std::array<double, 2>;

enum class ErrorCode {
  InvalidArgument,
  InadmissibleType,
  NonEvenDegree,
  UnsupportedCase,
  DegenerateRadius,
  BracketFailure,
  Undecided,
  RegionViolation,
  NoConvergence,
  WindowTooShort,
  NoAdmissiblePair,
  StepFailure,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Single exception type for the library; the code carries the structured
/// failure kind reported by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace expander
