#include "rsd/errors.hpp"

namespace rsd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingCovariate: return "MissingCovariate";
    case ErrorKind::UnknownLevel: return "UnknownLevel";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::TooFewGroups: return "TooFewGroups";
    case ErrorKind::AsymmetricInput: return "AsymmetricInput";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::SingularAfterEscalation: return "SingularAfterEscalation";
    case ErrorKind::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorKind::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorKind::NonPositiveStdError: return "NonPositiveStdError";
    case ErrorKind::UnknownPredictor: return "UnknownPredictor";
    case ErrorKind::NonPositiveDefinitePrior: return "NonPositiveDefinitePrior";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoAttemptsThatDay: return "NoAttemptsThatDay";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::SchemaFingerprintMismatch: return "SchemaFingerprintMismatch";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace rsd
