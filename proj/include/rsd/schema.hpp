#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rsd/errors.hpp"

namespace rsd {

enum class CovariateKind { Numeric, Categorical };

struct SchemaEntry {
  std::string name;
  CovariateKind kind = CovariateKind::Numeric;
  std::vector<std::string> levels;  // categorical only, declaration order
  std::string reference;            // categorical only, must be a level
};

// Ordered covariate schema. Coefficient layout is fixed: index 0 is the
// intercept ("(Intercept)"), then one coefficient per numeric entry, then
// one per non-reference level of each categorical entry ("name=level"),
// all in declaration order.
class CovariateSchema {
 public:
  explicit CovariateSchema(std::vector<SchemaEntry> entries);

  int coefficient_count() const { return static_cast<int>(coef_names_.size()); }
  const std::vector<std::string>& coefficient_names() const { return coef_names_; }
  const std::vector<SchemaEntry>& entries() const { return entries_; }

  // -1 when no coefficient carries that name.
  int coefficient_index(const std::string& coef_name) const;

  // 16-hex-digit FNV-1a hash of the canonical serialized form; identical
  // schemas hash identically on every platform.
  const std::string& fingerprint() const { return fingerprint_; }

  static const std::string& intercept_name();

 private:
  std::vector<SchemaEntry> entries_;
  std::vector<std::string> coef_names_;
  std::string fingerprint_;
};

using CovariateValue = std::variant<double, std::string>;

// One contact attempt. `outcome` is 1 when the screener interview was
// completed at this attempt.
struct CallRecord {
  int quarter = 0;
  std::string case_id;
  int day = 0;      // 1-based day of quarter
  int attempt = 0;  // 1-based per-case attempt index
  int outcome = 0;
  std::map<std::string, CovariateValue> covariates;
};

// Design row of length coefficient_count with leading 1 and reference-cell
// coding for categoricals.
Eigen::VectorXd build_design_row(const CallRecord& record,
                                 const CovariateSchema& schema);

// Stacked attempt-level data ready for likelihood evaluation.
struct Dataset {
  CovariateSchema schema;
  Eigen::MatrixXd X;  // n x coefficient_count, first column all ones
  Eigen::VectorXd y;  // 0/1
  std::vector<std::string> row_keys;  // "quarter/case/attempt", may be empty

  int n_rows() const { return static_cast<int>(X.rows()); }
  int coefficient_count() const { return static_cast<int>(X.cols()); }

  static Dataset from_records(const CovariateSchema& schema,
                              const std::vector<CallRecord>& records);

  // X must already carry the leading 1 column; a plain numeric schema
  // (x1..xC) is synthesized. Intended for tests and bindings.
  static Dataset from_matrix(Eigen::MatrixXd X, Eigen::VectorXd y);
};

}  // namespace rsd
