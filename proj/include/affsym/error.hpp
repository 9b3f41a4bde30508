#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affsym {

enum class ErrorKind {
  SingularConfiguration,
  DegenerateInvariants,
  EmptyBody,
  MissingConstant,
  MetricSingular,
  StepSizeUnderflow,
  SingularityApproached,
  CoincidentInvariants,
  SaturationExceeded,
  QuadratureFailure,
  SingularFrame,
  SingularMetric,
  SecondDerivativesUnavailable,
  InvalidArgument,
  ParseError,
  SemanticError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code used by the command line front end for each error class:
/// 2 parse, 3 semantic, 4 numerical, 5 I/O.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace affsym
