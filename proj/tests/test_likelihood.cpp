#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rsd/likelihood.hpp"
#include "support.hpp"

using namespace rsd;
using namespace testsupport;

TEST_CASE("inverse_logit pinned values") {
  CHECK(inverse_logit(0.0) == 0.5);
  CHECK(inverse_logit(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(inverse_logit(-std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("inverse_logit stays inside the open unit interval") {
  for (double eta : {-1000.0, -40.0, 0.0, 40.0, 1000.0}) {
    const double p = inverse_logit(eta);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("inverse_logit is increasing and complement-symmetric") {
  Rng rng(7);
  double prev = inverse_logit(-30.0);
  for (double eta = -29.5; eta <= 30.0; eta += 0.5) {
    const double p = inverse_logit(eta);
    CHECK(p > prev);
    prev = p;
  }
  for (int i = 0; i < 200; ++i) {
    const double eta = 12.0 * (rng.uniform() - 0.5);
    CHECK(inverse_logit(eta) + inverse_logit(-eta) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log likelihood at beta = 0 is n log(1/2)") {
  Rng rng(11);
  const Dataset d = random_dataset(rng, 37, 4);
  CHECK(log_likelihood(Eigen::VectorXd::Zero(4), d) ==
        doctest::Approx(37.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("single-row likelihood matches the forced inverse_logit value") {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  Eigen::VectorXd beta(1);
  beta << std::log(3.0);
  CHECK(log_likelihood(beta, X, y) ==
        doctest::Approx(std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("likelihood matches the naive term-by-term evaluator") {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5 + rng.uniform_int(0, 60);
    const int p = 2 + rng.uniform_int(0, 4);
    const Dataset d = random_dataset(rng, n, p);
    const Eigen::VectorXd beta = random_beta(rng, p, 1.5);
    CHECK(log_likelihood(beta, d) ==
          doctest::Approx(naive_log_likelihood(beta, d.X, d.y)).epsilon(1e-12));
    CHECK(log_likelihood(beta, d) <= 0.0);
  }
}

TEST_CASE("likelihood survives extreme linear predictors") {
  Eigen::MatrixXd X(2, 2);
  X << 1, 500, 1, -500;
  Eigen::VectorXd y(2);
  y << 1, 0;
  Eigen::VectorXd beta(2);
  beta << 0.0, 3.0;
  const double ll = log_likelihood(beta, X, y);
  CHECK(std::isfinite(ll));
  CHECK(ll <= 0.0);
}

TEST_CASE("gradient of a single centered row") {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  const Eigen::VectorXd g =
      log_likelihood_gradient(Eigen::VectorXd::Zero(1), X, y);
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gradient and hessian match central finite differences") {
  Rng rng(31);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 10 + rng.uniform_int(0, 80);
    const int p = 2 + rng.uniform_int(0, 4);
    const Dataset d = random_dataset(rng, n, p);
    const Eigen::VectorXd beta = random_beta(rng, p, 0.7);
    const Eigen::VectorXd g = log_likelihood_gradient(beta, d);
    CHECK(rel_err_inf(g, fd_gradient(beta, d.X, d.y)) < 1e-6);
    const Eigen::MatrixXd h = log_likelihood_hessian(beta, d);
    CHECK(rel_err_inf(h, fd_hessian(beta, d.X, d.y)) < 1e-4);
  }
}

TEST_CASE("negated hessian is positive semidefinite at random points") {
  Rng rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 5 + rng.uniform_int(0, 40);
    const int p = 2 + rng.uniform_int(0, 5);
    const Dataset d = random_dataset(rng, n, p);
    const Eigen::VectorXd beta = random_beta(rng, p, 1.2);
    Eigen::MatrixXd neg_h = -log_likelihood_hessian(beta, d);
    neg_h.diagonal().array() += 1e-10;  // semidefinite tolerance
    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(5);
  const Dataset d = random_dataset(rng, 10, 3);
  CHECK_THROWS_AS(log_likelihood(Eigen::VectorXd::Zero(4), d), Error);
  CHECK_THROWS_AS(log_likelihood_gradient(Eigen::VectorXd::Zero(2), d), Error);
  CHECK_THROWS_AS(log_likelihood_hessian(Eigen::VectorXd::Zero(5), d), Error);
}
