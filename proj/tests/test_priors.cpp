#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>

#include "rsd/priors.hpp"
#include "support.hpp"

using namespace rsd;
using namespace testsupport;

namespace {

CoefEstimate make_fit(Eigen::VectorXd beta, Eigen::MatrixXd cov,
                      const std::string& hash = "h") {
  return CoefEstimate{hash, std::move(beta), std::move(cov),
                      100, true, -50.0};
}

CoefEstimate scalar_fit(double beta, double var) {
  Eigen::VectorXd b(1);
  b << beta;
  Eigen::MatrixXd v(1, 1);
  v << var;
  return make_fit(b, v);
}

Eigen::MatrixXd random_correlation(Rng& rng, int p) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd v = a * a.transpose() / p;
  v.diagonal().array() += 0.05;
  return v;
}

}  // namespace

TEST_CASE("standard prior construction") {
  const PriorSpec p3 = standard_prior(3);
  CHECK(p3.mean.isZero(0.0));
  CHECK(p3.cov.isApprox(1e6 * Eigen::MatrixXd::Identity(3, 3)));
  const PriorSpec p1 = standard_prior(1, 4.0);
  CHECK(p1.cov(0, 0) == 4.0);
  CHECK_THROWS_AS(standard_prior(0), Error);
}

TEST_CASE("ridge stabilization") {
  Eigen::MatrixXd v(2, 2);
  v << 1.0, 0.5, 0.5, 1.0;
  SUBCASE("shrinks off-diagonals, keeps the diagonal") {
    const Eigen::MatrixXd out = ridge_stabilize(v, 0.2);
    CHECK(out(0, 0) == 1.0);
    CHECK(out(1, 1) == 1.0);
    CHECK(out(0, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(out(1, 0) == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("lambda 0 is the identity map") {
    CHECK(ridge_stabilize(v, 0.0).isApprox(v, 0.0));
  }
  SUBCASE("default lambda scales off-diagonals by 0.997") {
    CHECK(ridge_stabilize(v, 0.003)(0, 1) ==
          doctest::Approx(0.5 * 0.997).epsilon(1e-15));
  }
  SUBCASE("diagonal matrices are fixed points") {
    Eigen::MatrixXd d = Eigen::Vector2d(2.0, 3.0).asDiagonal();
    CHECK(ridge_stabilize(d, 0.7).isApprox(d, 0.0));
  }
  SUBCASE("asymmetric input is rejected") {
    Eigen::MatrixXd bad = v;
    bad(0, 1) = 0.9;
    CHECK_THROWS_AS(ridge_stabilize(bad, 0.1), Error);
    CHECK_THROWS_AS(ridge_stabilize(v, 1.5), Error);
  }
}

TEST_CASE("pwp over identical fits returns them unchanged") {
  Rng rng(3);
  const Eigen::MatrixXd v = random_correlation(rng, 4);
  const Eigen::VectorXd b = random_beta(rng, 4);
  std::vector<CoefEstimate> fits(6, make_fit(b, v));
  const PriorSpec prior = pwp_prior(fits, 0.0);
  CHECK((prior.mean - b).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((prior.cov - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pwp scalar hand examples") {
  SUBCASE("equal variances average the means") {
    const PriorSpec prior =
        pwp_prior({scalar_fit(1.0, 1.0), scalar_fit(3.0, 1.0)}, 0.0);
    CHECK(prior.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(prior.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("precision weights tilt the mean") {
    const PriorSpec prior =
        pwp_prior({scalar_fit(1.0, 1.0), scalar_fit(3.0, 1.0 / 3.0)}, 0.0);
    CHECK(prior.mean[0] == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(prior.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("pwp is permutation invariant and scale consistent") {
  Rng rng(9);
  std::vector<CoefEstimate> fits;
  for (int q = 0; q < 5; ++q)
    fits.push_back(make_fit(random_beta(rng, 3), random_correlation(rng, 3)));
  const PriorSpec base = pwp_prior(fits);

  std::reverse(fits.begin(), fits.end());
  const PriorSpec rev = pwp_prior(fits);
  CHECK((base.mean - rev.mean).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((base.cov - rev.cov).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<CoefEstimate> scaled = fits;
  for (auto& f : scaled) f.cov *= 7.0;
  const PriorSpec k = pwp_prior(scaled);
  CHECK((k.mean - base.mean).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(rel_err_inf(k.cov, Eigen::MatrixXd(7.0 * base.cov)) < 1e-10);
}

TEST_CASE("pwp weights fold into the precisions") {
  // Weight 3 on one scalar fit acts like tripling its precision.
  const PriorSpec weighted = pwp_prior(
      {scalar_fit(1.0, 1.0), scalar_fit(3.0, 1.0)}, 0.0, {1.0, 3.0});
  CHECK(weighted.mean[0] == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(weighted.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(
      pwp_prior({scalar_fit(1.0, 1.0)}, 0.0, {0.0}), Error);
}

TEST_CASE("pwp rejects mixed schemas and escalates lambda on singular input") {
  CHECK_THROWS_AS(pwp_prior({make_fit(Eigen::VectorXd::Zero(2),
                                      Eigen::MatrixXd::Identity(2, 2), "a"),
                             make_fit(Eigen::VectorXd::Zero(2),
                                      Eigen::MatrixXd::Identity(2, 2), "b")}),
                  Error);

  // Singular covariance with a healthy diagonal: lambda = 0 cannot factor it,
  // escalation must kick in and record the final lambda.
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  const auto fit = make_fit(Eigen::VectorXd::Zero(2), singular);
  const PriorSpec prior = pwp_prior({fit}, 0.0);
  CHECK(prior.provenance.front().find("lambda=") != std::string::npos);
  Eigen::LLT<Eigen::MatrixXd> llt(prior.cov);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("last prior passes the fit through unchanged") {
  Rng rng(21);
  const auto fit = make_fit(random_beta(rng, 3), random_correlation(rng, 3));
  const PriorSpec prior = last_prior(fit);
  CHECK(prior.mean.isApprox(fit.beta, 0.0));
  CHECK(prior.cov.isApprox(fit.cov, 0.0));
  CHECK(prior.method == PriorMethod::Last);
}

TEST_CASE("last prior surfaces non-positive-definite covariances") {
  Eigen::MatrixXd near_singular(2, 2);
  near_singular << 1.0, 1.0, 1.0, 1.0 + 1e-14;
  try {
    last_prior(make_fit(Eigen::VectorXd::Zero(2), near_singular));
    FAIL("expected NonPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveDefinite);
  }
}

TEST_CASE("lastz zeroes covariances and repairs what last rejects") {
  Eigen::MatrixXd v(2, 2);
  v << 1.0, 0.9, 0.9, 1.0;
  const auto fit = make_fit(Eigen::VectorXd::Ones(2), v);
  const PriorSpec prior = lastz_prior(fit);
  CHECK(prior.cov(0, 1) == 0.0);
  CHECK(prior.cov(0, 0) == 1.0);
  CHECK(prior.cov(1, 1) == 1.0);

  // Already-diagonal input coincides with last_prior.
  Eigen::MatrixXd d = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  const auto dfit = make_fit(Eigen::VectorXd::Ones(2), d);
  CHECK(lastz_prior(dfit).cov.isApprox(last_prior(dfit).cov, 0.0));

  Eigen::MatrixXd bad = d;
  bad(0, 0) = 0.0;
  CHECK_THROWS_AS(lastz_prior(make_fit(Eigen::VectorXd::Ones(2), bad)), Error);
}

TEST_CASE("lastz always yields a PD covariance on positive-diagonal input") {
  Rng rng(33);
  for (int rep = 0; rep < 50; ++rep) {
    // Rank-one plus a whisper of noise: nearly singular, positive diagonal.
    Eigen::VectorXd u = random_beta(rng, 4, 1.0);
    u = u.cwiseAbs().array() + 0.1;
    Eigen::MatrixXd v = u * u.transpose();
    v.diagonal().array() += 1e-13;
    const PriorSpec prior = lastz_prior(make_fit(Eigen::VectorXd::Zero(4), v));
    Eigen::LLT<Eigen::MatrixXd> llt(prior.cov);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("probit conversion") {
  auto [e1, s1] = probit_to_logit(0.5, 0.1);
  CHECK(e1 == doctest::Approx(0.805).epsilon(1e-15));
  CHECK(s1 == doctest::Approx(0.161).epsilon(1e-15));
  auto [e2, s2] = probit_to_logit(0.0, 2.0);
  CHECK(e2 == 0.0);
  CHECK(s2 == doctest::Approx(3.22).epsilon(1e-15));
  auto [e3, s3] = probit_to_logit(-1.0, 0.2);
  CHECK(e3 == doctest::Approx(-1.61).epsilon(1e-15));
  CHECK(s3 == doctest::Approx(0.322).epsilon(1e-15));
  CHECK_THROWS_AS(probit_to_logit(1.0, 0.0), Error);
}

namespace {

CovariateSchema two_coef_schema() {
  return CovariateSchema({{"x", CovariateKind::Numeric, {}, {}}});
}

}  // namespace

TEST_CASE("lit prior pools per coefficient with fallback elsewhere") {
  const CovariateSchema schema = two_coef_schema();
  std::vector<LitStudyEntry> entries{
      {"s1", 2013, "x", LitScale::Logit, 0.2, 0.1},
      {"s2", 2017, "x", LitScale::Logit, 0.4, std::sqrt(0.03)},
  };
  const PriorSpec prior = lit_prior(entries, schema);
  CHECK(prior.mean[1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(prior.cov(1, 1) == doctest::Approx(0.02).epsilon(1e-14));
  // Intercept gets no evidence: N(0, 10).
  CHECK(prior.mean[0] == 0.0);
  CHECK(prior.cov(0, 0) == 10.0);
  CHECK(prior.cov(0, 1) == 0.0);
}

TEST_CASE("lit prior converts probit entries before pooling") {
  const PriorSpec prior = lit_prior(
      {{"s", 2010, "x", LitScale::Probit, 0.5, 0.1}}, two_coef_schema());
  CHECK(prior.mean[1] == doctest::Approx(0.805).epsilon(1e-14));
  CHECK(prior.cov(1, 1) == doctest::Approx(0.161 * 0.161).epsilon(1e-14));
}

TEST_CASE("lit prior is order and split invariant") {
  const CovariateSchema schema =
      CovariateSchema({{"x", CovariateKind::Numeric, {}, {}},
                       {"z", CovariateKind::Numeric, {}, {}}});
  std::vector<LitStudyEntry> entries{
      {"a", 2009, "x", LitScale::Logit, 0.1, 0.2},
      {"b", 2011, "z", LitScale::Probit, -0.3, 0.15},
      {"c", 2015, "x", LitScale::Logit, 0.5, 0.1},
  };
  const PriorSpec base = lit_prior(entries, schema);
  std::reverse(entries.begin(), entries.end());
  const PriorSpec rev = lit_prior(entries, schema);
  CHECK(base.mean.isApprox(rev.mean, 1e-15));
  CHECK(base.cov.isApprox(rev.cov, 1e-15));
}

TEST_CASE("lit prior validates entries") {
  try {
    lit_prior({{"s", 2010, "nope", LitScale::Logit, 0.1, 0.1}}, two_coef_schema());
    FAIL("expected UnknownPredictor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownPredictor);
  }
  CHECK_THROWS_AS(
      lit_prior({{"s", 2010, "x", LitScale::Logit, 0.1, 0.0}}, two_coef_schema()),
      Error);
}

TEST_CASE("lit prior can target the intercept explicitly") {
  const PriorSpec prior = lit_prior(
      {{"s", 2012, "(Intercept)", LitScale::Logit, -2.0, 0.5}},
      two_coef_schema());
  CHECK(prior.mean[0] == doctest::Approx(-2.0));
  CHECK(prior.cov(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("every constructor yields a covariance passing Cholesky") {
  Rng rng(55);
  const auto fit = make_fit(random_beta(rng, 3), random_correlation(rng, 3));
  for (const PriorSpec& p :
       {standard_prior(3), pwp_prior({fit}), lastz_prior(fit), last_prior(fit)}) {
    CHECK_NOTHROW(validate_prior(p));
  }
}
