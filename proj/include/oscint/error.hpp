#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscint {

enum class ErrorCode {
  InvalidArgument,
  InvalidDomain,
  SimpsonOddCount,
  LengthMismatch,
  ZeroError,
  OutOfDomain,
  ParamOutOfSpace,
  StiffnessFailure,
  NonPositiveRadius,
  TruthNotConverged,
  EmptySplit,
  MalformedFile,
  SchemaMismatch,
  ShapeMismatch,
  DivergedLoss,
  VersionMismatch,
  CorruptModel,
  EmptyInput,
  TargetUnreachable,
  NoFeasibleArch,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oscint
