#pragma once

#include <stdexcept>
#include <string>

namespace nonholo {

enum class ErrorCode {
  OrderUnsupported = 1,
  EvaluationFailure,
  DegenerateVBlock,
  ZeroSection,
  SingularHessian,
  SignatureMismatch,
  SingularMetric,
  NotSasaki,
  NonpositiveFactor,
  WrongSignature,
  WrongDimension,
  RoleMismatch,
  SymmetryViolation,
  IncompatibleBackground,
  ZeroPi,
  StepFailure,
  ParseError,
  ValidationError,
  SuiteInapplicable,
  IoError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures carry a 1-based source location.
class ParseFailure : public Error {
 public:
  ParseFailure(const std::string& what, int line, int column)
      : Error(ErrorCode::ParseError, what + " at line " + std::to_string(line) + ", column " +
                                         std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace nonholo
