#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dclg {

enum class ErrorCode {
  InvalidParameter,
  EdgeProbabilityOverflow,
  IndexOutOfRange,
  InfiniteMean,
  QuadratureFailure,
  InversionFailure,
  DegenerateEdge,
  WrongFamily,
  NegativeCovariance,
  SeriesTooShort,
  NonConvergence,
  OutOfBounds,
  SingularJacobian,
  TooFewRuns,
  SampleTooSmall,
  DegenerateSample,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace dclg
