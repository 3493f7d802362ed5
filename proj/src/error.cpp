#include "oscint/error.hpp"

namespace oscint {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::SimpsonOddCount: return "SimpsonOddCount";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroError: return "ZeroError";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ParamOutOfSpace: return "ParamOutOfSpace";
    case ErrorCode::StiffnessFailure: return "StiffnessFailure";
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::TruthNotConverged: return "TruthNotConverged";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::NoFeasibleArch: return "NoFeasibleArch";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace oscint
