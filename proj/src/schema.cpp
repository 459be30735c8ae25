#include "rsd/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <set>
#include <sstream>

namespace rsd {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace

const std::string& CovariateSchema::intercept_name() {
  static const std::string name = "(Intercept)";
  return name;
}

CovariateSchema::CovariateSchema(std::vector<SchemaEntry> entries)
    : entries_(std::move(entries)) {
  coef_names_.push_back(intercept_name());
  std::set<std::string> seen{intercept_name()};
  std::ostringstream canon;
  for (const auto& e : entries_) {
    if (e.name.empty()) fail(ErrorKind::InvalidConfig, "schema entry with empty name");
    canon << e.name << '\x1f';
    if (e.kind == CovariateKind::Numeric) {
      canon << "numeric\x1e";
      if (!seen.insert(e.name).second)
        fail(ErrorKind::InvalidConfig, "duplicate coefficient name: " + e.name);
      coef_names_.push_back(e.name);
      continue;
    }
    if (e.levels.size() < 2)
      fail(ErrorKind::InvalidConfig, "categorical '" + e.name + "' needs >= 2 levels");
    if (std::find(e.levels.begin(), e.levels.end(), e.reference) == e.levels.end())
      fail(ErrorKind::InvalidConfig,
           "categorical '" + e.name + "': reference '" + e.reference +
               "' is not among its levels");
    canon << "categorical\x1f" << e.reference;
    std::set<std::string> level_seen;
    for (const auto& lvl : e.levels) {
      canon << '\x1f' << lvl;
      if (!level_seen.insert(lvl).second)
        fail(ErrorKind::InvalidConfig,
             "categorical '" + e.name + "': duplicate level '" + lvl + "'");
      if (lvl == e.reference) continue;
      std::string coef = e.name + "=" + lvl;
      if (!seen.insert(coef).second)
        fail(ErrorKind::InvalidConfig, "duplicate coefficient name: " + coef);
      coef_names_.push_back(coef);
    }
    canon << '\x1e';
  }
  fingerprint_ = to_hex16(fnv1a64(canon.str()));
}

int CovariateSchema::coefficient_index(const std::string& coef_name) const {
  auto it = std::find(coef_names_.begin(), coef_names_.end(), coef_name);
  if (it == coef_names_.end()) return -1;
  return static_cast<int>(it - coef_names_.begin());
}

namespace {

double numeric_value(const std::string& entry_name, const CovariateValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  const std::string& s = std::get<std::string>(v);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::UnknownLevel,
         "covariate '" + entry_name + "': non-numeric value '" + s + "'");
  return out;
}

const std::string& categorical_value(const std::string& entry_name,
                                     const CovariateValue& v) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  fail(ErrorKind::UnknownLevel,
       "covariate '" + entry_name + "': numeric value for categorical entry");
}

}  // namespace

Eigen::VectorXd build_design_row(const CallRecord& record,
                                 const CovariateSchema& schema) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(schema.coefficient_count());
  row[0] = 1.0;
  int j = 1;
  for (const auto& e : schema.entries()) {
    auto it = record.covariates.find(e.name);
    if (it == record.covariates.end())
      fail(ErrorKind::MissingCovariate, e.name);
    if (e.kind == CovariateKind::Numeric) {
      row[j++] = numeric_value(e.name, it->second);
      continue;
    }
    const std::string& value = categorical_value(e.name, it->second);
    if (std::find(e.levels.begin(), e.levels.end(), value) == e.levels.end())
      fail(ErrorKind::UnknownLevel,
           "covariate '" + e.name + "': unknown level '" + value + "'");
    for (const auto& lvl : e.levels) {
      if (lvl == e.reference) continue;
      row[j++] = (lvl == value) ? 1.0 : 0.0;
    }
  }
  return row;
}

Dataset Dataset::from_records(const CovariateSchema& schema,
                              const std::vector<CallRecord>& records) {
  Dataset d{schema, Eigen::MatrixXd(records.size(), schema.coefficient_count()),
            Eigen::VectorXd(records.size()), {}};
  d.row_keys.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    d.X.row(static_cast<Eigen::Index>(i)) = build_design_row(r, schema);
    d.y[static_cast<Eigen::Index>(i)] = r.outcome ? 1.0 : 0.0;
    d.row_keys.push_back(std::to_string(r.quarter) + "/" + r.case_id + "/" +
                         std::to_string(r.attempt));
  }
  return d;
}

Dataset Dataset::from_matrix(Eigen::MatrixXd X, Eigen::VectorXd y) {
  if (X.rows() != y.size())
    fail(ErrorKind::DimensionMismatch, "design rows != outcome length");
  if (X.cols() < 1 || !(X.col(0).array() == 1.0).all())
    fail(ErrorKind::InvalidConfig, "first design column must be all ones");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      fail(ErrorKind::InvalidConfig, "outcomes must be 0 or 1");
  std::vector<SchemaEntry> entries;
  for (int c = 1; c < X.cols(); ++c)
    entries.push_back({"x" + std::to_string(c), CovariateKind::Numeric, {}, {}});
  return Dataset{CovariateSchema(std::move(entries)), std::move(X), std::move(y), {}};
}

}  // namespace rsd
