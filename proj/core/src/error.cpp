#include "dclg/error.hpp"

namespace dclg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::EdgeProbabilityOverflow: return "EdgeProbabilityOverflow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InfiniteMean: return "InfiniteMean";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::InversionFailure: return "InversionFailure";
    case ErrorCode::DegenerateEdge: return "DegenerateEdge";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::NegativeCovariance: return "NegativeCovariance";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dclg
