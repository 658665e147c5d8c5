#include "nonholo/errors.hpp"

namespace nonholo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OrderUnsupported: return "OrderUnsupported";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::DegenerateVBlock: return "DegenerateVBlock";
    case ErrorCode::ZeroSection: return "ZeroSection";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::NotSasaki: return "NotSasaki";
    case ErrorCode::NonpositiveFactor: return "NonpositiveFactor";
    case ErrorCode::WrongSignature: return "WrongSignature";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::RoleMismatch: return "RoleMismatch";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::IncompatibleBackground: return "IncompatibleBackground";
    case ErrorCode::ZeroPi: return "ZeroPi";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::SuiteInapplicable: return "SuiteInapplicable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace nonholo
