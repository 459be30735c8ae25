#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsd/rsd_loop.hpp"
#include "rsd/schema.hpp"

namespace rsd {

struct SimCategorical {
  std::string name;
  std::vector<std::string> levels;  // first level is the reference
  std::vector<double> probs;        // one per level, sums to 1
};

// Synthetic multi-quarter call-attempt generator with a known coefficient
// vector. Static covariates are drawn once per case; dynamic paradata
// columns (prior contact, log attempt count, day fraction, phase-2 flag)
// are recomputed from the case's own history.
struct SimConfig {
  int n_quarters = 1;
  int cases_per_quarter = 500;
  int quarter_length = 84;
  int phase2_start = 71;
  std::vector<std::string> numeric_covariates;  // static, standard normal
  std::vector<SimCategorical> categorical_covariates;
  bool derived_paradata = true;
  Eigen::VectorXd true_beta;  // over schema(); intercept first
  int max_attempts_per_case = 12;
  double attempt_gap = 5.0;   // mean days between attempts (geometric)
  double contact_prob = 0.35; // chance a failed attempt still reaches someone
  std::optional<double> target_rr;  // case-level rate; calibrates intercept
  double drift = 0.0;               // per-quarter coefficient perturbation sd
  std::uint64_t seed = 0;

  CovariateSchema schema() const;

  // 12-coefficient setup producing roughly 2,000 attempts per quarter.
  static SimConfig desk_default();
};

struct TruthRow {
  int quarter = 0;
  std::string case_id;
  int day = 0;
  int attempt = 0;
  double p = 0.0;
};

struct SimResult {
  std::vector<QuarterData> quarters;
  std::vector<Eigen::VectorXd> true_beta;  // per quarter, after drift
  std::vector<TruthRow> truth;
  double calibrated_intercept = 0.0;
  double realized_response_rate = 0.0;  // case level, pooled over quarters
};

SimResult simulate_quarters(const SimConfig& cfg);

struct CaseHistory {
  std::map<std::string, CovariateValue> static_covariates;
  int attempts_made = 0;     // attempts before the one being evaluated
  bool contact_made = false; // any earlier attempt reached a household member
};

// Propensity of the next attempt for this case on `day` under `true_beta`,
// with the derived paradata columns recomputed from the history.
double true_propensity(const CaseHistory& history, int day,
                       const Eigen::VectorXd& true_beta, const SimConfig& cfg);

}  // namespace rsd
