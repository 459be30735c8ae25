#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "rsd/likelihood.hpp"
#include "rsd/mle.hpp"
#include "rsd/priors.hpp"
#include "rsd/simulator.hpp"
#include "support.hpp"

using namespace rsd;

namespace {

SimConfig intercept_only_config(double beta0, int cases) {
  SimConfig cfg;
  cfg.n_quarters = 1;
  cfg.cases_per_quarter = cases;
  cfg.derived_paradata = false;
  cfg.max_attempts_per_case = 1;
  Eigen::VectorXd beta(1);
  beta << beta0;
  cfg.true_beta = beta;
  return cfg;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("intercept-only simulation hits the attempt-level rate") {
  SimConfig cfg = intercept_only_config(logit(0.25), 10000);
  cfg.seed = 31;
  const SimResult sim = simulate_quarters(cfg);
  const auto& records = sim.quarters[0].records;
  CHECK(records.size() == 10000);
  double successes = 0;
  for (const auto& r : records) successes += r.outcome;
  CHECK(successes / 10000.0 == doctest::Approx(0.25).epsilon(0.06));
  CHECK(std::abs(successes / 10000.0 - 0.25) < 0.015);
}

TEST_CASE("target response rate calibration") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 2;
  cfg.cases_per_quarter = 2000;
  cfg.target_rr = 0.89;
  cfg.seed = 17;
  const SimResult sim = simulate_quarters(cfg);
  CHECK(std::abs(sim.realized_response_rate - 0.89) < 0.02);

  SimConfig bad = cfg;
  bad.target_rr = 0.99999;  // unreachable under the attempt cap
  CHECK_THROWS_AS(simulate_quarters(bad), Error);
}

TEST_CASE("simulation is deterministic by seed") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 1;
  cfg.cases_per_quarter = 50;
  cfg.seed = 77;
  const SimResult a = simulate_quarters(cfg);
  const SimResult b = simulate_quarters(cfg);
  REQUIRE(a.quarters[0].records.size() == b.quarters[0].records.size());
  for (std::size_t i = 0; i < a.quarters[0].records.size(); ++i) {
    const auto& ra = a.quarters[0].records[i];
    const auto& rb = b.quarters[0].records[i];
    CHECK(ra.case_id == rb.case_id);
    CHECK(ra.day == rb.day);
    CHECK(ra.attempt == rb.attempt);
    CHECK(ra.outcome == rb.outcome);
    CHECK(std::get<double>(ra.covariates.at("frame_score")) ==
          std::get<double>(rb.covariates.at("frame_score")));
  }
  CHECK(a.truth.size() == b.truth.size());
}

TEST_CASE("attempt sequences respect the generative invariants") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 2;
  cfg.cases_per_quarter = 300;
  cfg.seed = 5;
  const SimResult sim = simulate_quarters(cfg);
  for (const auto& q : sim.quarters) {
    std::map<std::string, int> last_attempt;
    std::set<std::string> done;
    for (const auto& r : q.records) {
      CHECK(r.day >= 1);
      CHECK(r.day <= cfg.quarter_length);
      CHECK(!done.count(r.case_id));  // nothing after a success
      CHECK(r.attempt == last_attempt[r.case_id] + 1);  // contiguous from 1
      last_attempt[r.case_id] = r.attempt;
      if (r.outcome == 1) done.insert(r.case_id);
      CHECK(r.attempt <= cfg.max_attempts_per_case);
    }
  }
}

TEST_CASE("truth sidecar matches the recorded attempts") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 1;
  cfg.cases_per_quarter = 100;
  cfg.seed = 91;
  const SimResult sim = simulate_quarters(cfg);
  std::size_t total = 0;
  for (const auto& q : sim.quarters) total += q.records.size();
  CHECK(sim.truth.size() == total);
  for (const auto& t : sim.truth) {
    CHECK(t.p > 0.0);
    CHECK(t.p < 1.0);
  }
}

TEST_CASE("empirical success rate converges to the mean true propensity") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 1;
  cfg.cases_per_quarter = 30000;  // ~100k attempts
  cfg.seed = 19;
  const SimResult sim = simulate_quarters(cfg);
  double successes = 0;
  double p_sum = 0;
  for (const auto& t : sim.truth) p_sum += t.p;
  for (const auto& r : sim.quarters[0].records) successes += r.outcome;
  const double n = static_cast<double>(sim.truth.size());
  CHECK(n > 80000);
  CHECK(std::abs(successes / n - p_sum / n) < 0.01);
}

TEST_CASE("true propensity basics") {
  SimConfig cfg = SimConfig::desk_default();
  CaseHistory h;
  h.static_covariates["frame_score"] = 0.0;
  h.static_covariates["division"] = std::string("A");
  h.static_covariates["structure"] = std::string("single");

  SUBCASE("zero coefficients give one half") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(12);
    CHECK(true_propensity(h, 10, zero, cfg) == 0.5);
  }
  SUBCASE("a positive phase-2 coefficient lifts day 71 over day 70") {
    const Eigen::VectorXd beta = cfg.true_beta;
    CHECK(true_propensity(h, 71, beta, cfg) > true_propensity(h, 70, beta, cfg));
  }
  SUBCASE("prior contact enters through the history") {
    CaseHistory contacted = h;
    contacted.attempts_made = 1;
    contacted.contact_made = true;
    CaseHistory missed = h;
    missed.attempts_made = 1;
    CHECK(true_propensity(contacted, 30, cfg.true_beta, cfg) >
          true_propensity(missed, 30, cfg.true_beta, cfg));
  }
}

TEST_CASE("mle on a large simulation recovers the true coefficients") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.n_quarters = 1;
  cfg.cases_per_quarter = 15000;  // ~50k attempts
  cfg.seed = 23;
  const SimResult sim = simulate_quarters(cfg);
  const Dataset data =
      Dataset::from_records(cfg.schema(), sim.quarters[0].records);
  const CoefEstimate est = fit_mle(data);
  REQUIRE(est.converged);
  const Eigen::VectorXd truth = sim.true_beta[0];
  for (int j = 0; j < est.beta.size(); ++j) {
    const double se = std::sqrt(est.cov(j, j));
    CHECK(std::abs(est.beta[j] - truth[j]) < 3.0 * se);
  }
}

TEST_CASE("pwp prior from exchangeable quarters brackets the truth") {
  int ok_components = 0;
  int total = 0;
  for (int seed = 0; seed < 20; ++seed) {
    SimConfig cfg = SimConfig::desk_default();
    cfg.n_quarters = 8;
    cfg.cases_per_quarter = 500;
    cfg.target_rr.reset();  // plain intercept, no calibration needed here
    cfg.seed = 4000 + static_cast<std::uint64_t>(seed);
    const SimResult sim = simulate_quarters(cfg);
    std::vector<CoefEstimate> fits;
    for (const auto& q : sim.quarters)
      fits.push_back(fit_mle(Dataset::from_records(cfg.schema(), q.records)));
    const PriorSpec prior = pwp_prior(fits);
    const Eigen::VectorXd truth = sim.true_beta[0];
    for (int j = 0; j < prior.dim(); ++j) {
      ++total;
      if (std::abs(prior.mean[j] - truth[j]) <=
          3.0 * std::sqrt(prior.cov(j, j)))
        ++ok_components;
    }
  }
  CHECK(ok_components >= static_cast<int>(0.9 * total));
}

TEST_CASE("config validation") {
  SimConfig cfg = SimConfig::desk_default();
  cfg.true_beta = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(simulate_quarters(cfg), Error);

  SimConfig bad = SimConfig::desk_default();
  bad.phase2_start = 100;
  CHECK_THROWS_AS(simulate_quarters(bad), Error);

  SimConfig badp = SimConfig::desk_default();
  badp.categorical_covariates[0].probs[0] = 0.9;  // no longer sums to 1
  CHECK_THROWS_AS(simulate_quarters(badp), Error);
}
