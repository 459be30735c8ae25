#include "rsd/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "rsd/likelihood.hpp"
#include "rsd/rng.hpp"

namespace rsd {

namespace {

constexpr const char* kPriorContact = "prior_contact";
constexpr const char* kLogCalls = "log_calls";
constexpr const char* kDayFrac = "day_frac";
constexpr const char* kPhase2 = "phase2";

constexpr std::uint64_t kSaltCase = 101;
constexpr std::uint64_t kSaltDrift = 202;
constexpr std::uint64_t kSaltCalibration = 303;

void validate_config(const SimConfig& cfg) {
  if (cfg.n_quarters < 1 || cfg.cases_per_quarter < 1)
    fail(ErrorKind::InvalidConfig, "need at least one quarter and one case");
  if (cfg.quarter_length < 1)
    fail(ErrorKind::InvalidConfig, "quarter_length must be >= 1");
  if (cfg.phase2_start < 1 || cfg.phase2_start > cfg.quarter_length)
    fail(ErrorKind::InvalidConfig, "phase2_start outside [1, quarter_length]");
  if (cfg.max_attempts_per_case < 1)
    fail(ErrorKind::InvalidConfig, "max_attempts_per_case must be >= 1");
  if (cfg.attempt_gap < 1.0)
    fail(ErrorKind::InvalidConfig, "attempt_gap must be >= 1");
  if (cfg.contact_prob < 0.0 || cfg.contact_prob > 1.0)
    fail(ErrorKind::InvalidConfig, "contact_prob must be in [0, 1]");
  if (cfg.target_rr && !(*cfg.target_rr > 0.0 && *cfg.target_rr < 1.0))
    fail(ErrorKind::InvalidConfig, "target_rr must be in (0, 1)");
  if (cfg.drift < 0.0) fail(ErrorKind::InvalidConfig, "drift must be >= 0");
  for (const auto& c : cfg.categorical_covariates) {
    if (c.levels.size() != c.probs.size() || c.levels.size() < 2)
      fail(ErrorKind::InvalidConfig,
           "categorical '" + c.name + "' needs matching levels/probs (>= 2)");
    double sum = 0.0;
    for (double p : c.probs) {
      if (!(p > 0.0)) fail(ErrorKind::InvalidConfig, "level probs must be > 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(ErrorKind::InvalidConfig,
           "level probs of '" + c.name + "' must sum to 1");
  }
}

}  // namespace

CovariateSchema SimConfig::schema() const {
  std::vector<SchemaEntry> entries;
  for (const auto& n : numeric_covariates)
    entries.push_back({n, CovariateKind::Numeric, {}, {}});
  for (const auto& c : categorical_covariates)
    entries.push_back({c.name, CovariateKind::Categorical, c.levels, c.levels[0]});
  if (derived_paradata) {
    for (const char* n : {kPriorContact, kLogCalls, kDayFrac, kPhase2})
      entries.push_back({n, CovariateKind::Numeric, {}, {}});
  }
  return CovariateSchema(std::move(entries));
}

SimConfig SimConfig::desk_default() {
  SimConfig cfg;
  cfg.cases_per_quarter = 700;
  cfg.numeric_covariates = {"frame_score"};
  cfg.categorical_covariates = {
      {"division", {"A", "B", "C", "D", "E"}, {0.30, 0.20, 0.20, 0.15, 0.15}},
      {"structure", {"single", "small_multi", "large_multi"}, {0.60, 0.25, 0.15}},
  };
  cfg.target_rr = 0.89;
  Eigen::VectorXd beta(12);
  // intercept, frame_score, division B..E, structure small/large_multi,
  // prior_contact, log_calls, day_frac, phase2
  beta << -1.0, 0.15, -0.30, -0.20, -0.25, -0.15, -0.25, -0.20, 0.40, -0.50,
      0.30, 0.35;
  cfg.true_beta = beta;
  return cfg;
}

double true_propensity(const CaseHistory& history, int day,
                       const Eigen::VectorXd& true_beta, const SimConfig& cfg) {
  CallRecord r;
  r.day = day;
  r.attempt = history.attempts_made + 1;
  r.covariates = history.static_covariates;
  if (cfg.derived_paradata) {
    r.covariates[kPriorContact] = history.contact_made ? 1.0 : 0.0;
    r.covariates[kLogCalls] = std::log(static_cast<double>(r.attempt));
    r.covariates[kDayFrac] =
        static_cast<double>(day) / static_cast<double>(cfg.quarter_length);
    r.covariates[kPhase2] = day >= cfg.phase2_start ? 1.0 : 0.0;
  }
  const Eigen::VectorXd x = build_design_row(r, cfg.schema());
  return inverse_logit(true_beta.dot(x));
}

namespace {

struct CaseDraws {
  std::map<std::string, CovariateValue> statics;
  int start_day = 0;
};

CaseDraws draw_case_statics(const SimConfig& cfg, Rng& rng) {
  CaseDraws out;
  for (const auto& n : cfg.numeric_covariates) out.statics[n] = rng.normal();
  for (const auto& c : cfg.categorical_covariates) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = c.levels.size() - 1;
    for (std::size_t i = 0; i < c.probs.size(); ++i) {
      cum += c.probs[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    out.statics[c.name] = c.levels[pick];
  }
  out.start_day = rng.uniform_int(1, cfg.quarter_length);
  return out;
}

// Walks one case through its attempt sequence. The per-attempt draw order
// (outcome, contact, gap) is fixed and unconditional so that candidate
// intercepts during calibration see identical random streams.
template <typename OnAttempt>
bool walk_case(const SimConfig& cfg, const CovariateSchema& schema,
               const Eigen::VectorXd& beta, Rng& rng, OnAttempt&& on_attempt) {
  const CaseDraws cd = draw_case_statics(cfg, rng);
  CallRecord r;
  r.covariates = cd.statics;
  int day = cd.start_day;
  bool contact = false;
  for (int attempt = 1;
       attempt <= cfg.max_attempts_per_case && day <= cfg.quarter_length;
       ++attempt) {
    r.day = day;
    r.attempt = attempt;
    if (cfg.derived_paradata) {
      r.covariates[kPriorContact] = contact ? 1.0 : 0.0;
      r.covariates[kLogCalls] = std::log(static_cast<double>(attempt));
      r.covariates[kDayFrac] = static_cast<double>(day) /
                               static_cast<double>(cfg.quarter_length);
      r.covariates[kPhase2] = day >= cfg.phase2_start ? 1.0 : 0.0;
    }
    const double p = inverse_logit(beta.dot(build_design_row(r, schema)));
    const bool success = rng.uniform() < p;
    const bool contact_now = rng.bernoulli(cfg.contact_prob);
    const int gap = rng.geometric(1.0 / cfg.attempt_gap);
    r.outcome = success ? 1 : 0;
    on_attempt(r, p);
    if (success) return true;
    contact = contact || contact_now;
    day += gap;
  }
  return false;
}

struct DerivedIndices {
  int prior_contact = -1;
  int log_calls = -1;
  int day_frac = -1;
  int phase2 = -1;
};

DerivedIndices derived_indices(const CovariateSchema& schema) {
  return DerivedIndices{schema.coefficient_index(kPriorContact),
                        schema.coefficient_index(kLogCalls),
                        schema.coefficient_index(kDayFrac),
                        schema.coefficient_index(kPhase2)};
}

// Record-free replay of walk_case: identical draw order, with the static
// covariate contribution folded into one dot product per case.
bool walk_case_fast(const SimConfig& cfg, const CovariateSchema& schema,
                    const DerivedIndices& di, const Eigen::VectorXd& beta,
                    Rng& rng) {
  const CaseDraws cd = draw_case_statics(cfg, rng);
  CallRecord r;
  r.day = 1;
  r.attempt = 1;
  r.covariates = cd.statics;
  if (cfg.derived_paradata) {
    r.covariates[kPriorContact] = 0.0;
    r.covariates[kLogCalls] = 0.0;
    r.covariates[kDayFrac] = 0.0;
    r.covariates[kPhase2] = 0.0;
  }
  const double base_eta = beta.dot(build_design_row(r, schema));
  int day = cd.start_day;
  bool contact = false;
  for (int attempt = 1;
       attempt <= cfg.max_attempts_per_case && day <= cfg.quarter_length;
       ++attempt) {
    double eta = base_eta;
    if (cfg.derived_paradata) {
      if (contact) eta += beta[di.prior_contact];
      eta += beta[di.log_calls] * std::log(static_cast<double>(attempt));
      eta += beta[di.day_frac] * static_cast<double>(day) /
             static_cast<double>(cfg.quarter_length);
      if (day >= cfg.phase2_start) eta += beta[di.phase2];
    }
    const bool success = rng.uniform() < inverse_logit(eta);
    const bool contact_now = rng.bernoulli(cfg.contact_prob);
    const int gap = rng.geometric(1.0 / cfg.attempt_gap);
    if (success) return true;
    contact = contact || contact_now;
    day += gap;
  }
  return false;
}

// Expected case-level response rate at a candidate intercept, evaluated on
// a dedicated stream with common random numbers (monotone in the intercept).
double calibration_rate(const SimConfig& cfg, const CovariateSchema& schema,
                        Eigen::VectorXd beta, double intercept) {
  beta[0] = intercept;
  const DerivedIndices di = derived_indices(schema);
  const int n_cal = 20000;
  int successes = 0;
  for (int i = 0; i < n_cal; ++i) {
    Rng rng(derive_seed(cfg.seed, {kSaltCalibration, static_cast<std::uint64_t>(i)}));
    if (walk_case_fast(cfg, schema, di, beta, rng)) ++successes;
  }
  return static_cast<double>(successes) / n_cal;
}

double calibrate_intercept(const SimConfig& cfg, const CovariateSchema& schema) {
  const double target = *cfg.target_rr;
  double lo = -10.0;
  double hi = 6.0;
  double rate_lo = calibration_rate(cfg, schema, cfg.true_beta, lo);
  double rate_hi = calibration_rate(cfg, schema, cfg.true_beta, hi);
  if (rate_lo > target || rate_hi < target)
    fail(ErrorKind::CalibrationFailed,
         "target_rr " + std::to_string(target) + " outside reachable range [" +
             std::to_string(rate_lo) + ", " + std::to_string(rate_hi) + "]");
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double rate = calibration_rate(cfg, schema, cfg.true_beta, mid);
    if (std::abs(rate - target) <= 0.005 && hi - lo < 0.01) return mid;
    if (rate < target)
      lo = mid;
    else
      hi = mid;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(calibration_rate(cfg, schema, cfg.true_beta, mid) - target) >
      0.005)
    fail(ErrorKind::CalibrationFailed, "bisection did not reach the target");
  return mid;
}

}  // namespace

SimResult simulate_quarters(const SimConfig& cfg) {
  validate_config(cfg);
  const CovariateSchema schema = cfg.schema();
  if (cfg.true_beta.size() != schema.coefficient_count())
    fail(ErrorKind::InvalidConfig,
         "true_beta has " + std::to_string(cfg.true_beta.size()) +
             " entries, schema needs " +
             std::to_string(schema.coefficient_count()));

  SimResult result;
  Eigen::VectorXd base_beta = cfg.true_beta;
  if (cfg.target_rr) {
    result.calibrated_intercept = calibrate_intercept(cfg, schema);
    base_beta[0] = result.calibrated_intercept;
  } else {
    result.calibrated_intercept = base_beta[0];
  }

  int case_successes = 0;
  for (int q = 1; q <= cfg.n_quarters; ++q) {
    Eigen::VectorXd beta = base_beta;
    if (cfg.drift > 0.0) {
      Rng drift_rng(derive_seed(cfg.seed, {kSaltDrift, static_cast<std::uint64_t>(q)}));
      for (Eigen::Index j = 0; j < beta.size(); ++j)
        beta[j] += cfg.drift * drift_rng.normal();
    }

    std::vector<CallRecord> records;
    for (int i = 0; i < cfg.cases_per_quarter; ++i) {
      const std::string case_id =
          "q" + std::to_string(q) + "c" + std::to_string(i + 1);
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(q),
                                     static_cast<std::uint64_t>(i), kSaltCase}));
      const bool responded = walk_case(
          cfg, schema, beta, rng, [&](const CallRecord& r, double p) {
            CallRecord rec = r;
            rec.quarter = q;
            rec.case_id = case_id;
            records.push_back(std::move(rec));
            result.truth.push_back({q, case_id, r.day, r.attempt, p});
          });
      if (responded) ++case_successes;
    }
    result.quarters.push_back(
        QuarterData::create(q, schema, std::move(records), cfg.quarter_length));
    result.true_beta.push_back(std::move(beta));
  }
  result.realized_response_rate =
      static_cast<double>(case_successes) /
      (static_cast<double>(cfg.n_quarters) * cfg.cases_per_quarter);
  return result;
}

}  // namespace rsd
