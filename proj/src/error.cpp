#include "affsym/error.hpp"

namespace affsym {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularConfiguration: return "SingularConfiguration";
    case ErrorKind::DegenerateInvariants: return "DegenerateInvariants";
    case ErrorKind::EmptyBody: return "EmptyBody";
    case ErrorKind::MissingConstant: return "MissingConstant";
    case ErrorKind::MetricSingular: return "MetricSingular";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::SingularityApproached: return "SingularityApproached";
    case ErrorKind::CoincidentInvariants: return "CoincidentInvariants";
    case ErrorKind::SaturationExceeded: return "SaturationExceeded";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SingularFrame: return "SingularFrame";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::SecondDerivativesUnavailable: return "SecondDerivativesUnavailable";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SemanticError: return "SemanticError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
      return 2;
    case ErrorKind::SemanticError:
    case ErrorKind::MissingConstant:
    case ErrorKind::InvalidArgument:
    case ErrorKind::EmptyBody:
      return 3;
    case ErrorKind::IoError:
      return 5;
    default:
      return 4;
  }
}

}  // namespace affsym
