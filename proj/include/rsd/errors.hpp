#pragma once

#include <stdexcept>
#include <string>

namespace rsd {

// Failure modes of the public operations. The CLI reports these as a single
// machine-parseable line: "error: <kind>: <message>".
enum class ErrorKind {
  MissingCovariate,
  UnknownLevel,
  DimensionMismatch,
  DegenerateData,
  TooFewGroups,
  AsymmetricInput,
  SchemaMismatch,
  SingularAfterEscalation,
  NonPositiveDefinite,
  NonPositiveVariance,
  NonPositiveStdError,
  UnknownPredictor,
  NonPositiveDefinitePrior,
  EmptyInput,
  NoAttemptsThatDay,
  InvalidConfig,
  CalibrationFailed,
  FileNotFound,
  SchemaFingerprintMismatch,
  ParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rsd
