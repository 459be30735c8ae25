#include "rsd/priors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rsd {

const char* to_string(PriorMethod m) {
  switch (m) {
    case PriorMethod::Standard: return "standard";
    case PriorMethod::Pwp: return "pwp";
    case PriorMethod::Last: return "last";
    case PriorMethod::Lastz: return "lastz";
    case PriorMethod::Lit: return "lit";
  }
  return "?";
}

PriorMethod prior_method_from_string(const std::string& s) {
  if (s == "standard") return PriorMethod::Standard;
  if (s == "pwp") return PriorMethod::Pwp;
  if (s == "last") return PriorMethod::Last;
  if (s == "lastz") return PriorMethod::Lastz;
  if (s == "lit") return PriorMethod::Lit;
  fail(ErrorKind::InvalidConfig, "unknown prior method '" + s + "'");
}

namespace {

void check_symmetric(const Eigen::MatrixXd& V, ErrorKind kind) {
  if (V.rows() != V.cols()) fail(kind, "matrix is not square");
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
  if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(kind, "matrix is not symmetric");
}

}  // namespace

void validate_prior(const PriorSpec& prior) {
  if (prior.mean.size() != prior.cov.rows())
    fail(ErrorKind::DimensionMismatch, "prior mean/cov dimensions differ");
  check_symmetric(prior.cov, ErrorKind::NonPositiveDefinitePrior);
  // PSD with tolerance: jitter the diagonal before factorizing.
  Eigen::MatrixXd jittered = prior.cov;
  const double jitter = 1e-10 * std::max(1.0, prior.cov.diagonal().maxCoeff());
  jittered.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(jittered);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveDefinitePrior,
         "prior covariance is not positive semidefinite");
}

PriorSpec standard_prior(int dim, double variance) {
  if (dim < 1) fail(ErrorKind::InvalidConfig, "prior dimension must be >= 1");
  if (variance <= 0.0) fail(ErrorKind::InvalidConfig, "prior variance must be > 0");
  PriorSpec prior{PriorMethod::Standard, Eigen::VectorXd::Zero(dim),
                  variance * Eigen::MatrixXd::Identity(dim, dim),
                  {"noninformative variance=" + std::to_string(variance)},
                  "",
                  true};
  return prior;
}

Eigen::MatrixXd ridge_stabilize(const Eigen::MatrixXd& V, double lambda) {
  check_symmetric(V, ErrorKind::AsymmetricInput);
  if (lambda < 0.0 || lambda > 1.0)
    fail(ErrorKind::InvalidConfig, "lambda must be in [0, 1]");
  Eigen::MatrixXd out = (1.0 - lambda) * V;
  out.diagonal() = V.diagonal();  // diagonal is exact, only off-diagonals shrink
  return out;
}

PriorSpec pwp_prior(const std::vector<CoefEstimate>& fits, double lambda,
                    const std::vector<double>& weights) {
  if (fits.empty()) fail(ErrorKind::EmptyInput, "pwp needs at least one fit");
  const auto q_count = fits.size();
  const Eigen::Index p = fits.front().beta.size();
  for (const auto& f : fits) {
    if (f.schema_hash != fits.front().schema_hash || f.beta.size() != p)
      fail(ErrorKind::SchemaMismatch, "fits come from different schemas");
  }
  if (!weights.empty()) {
    if (weights.size() != q_count)
      fail(ErrorKind::DimensionMismatch, "one weight per quarter required");
    for (double w : weights)
      if (!(w > 0.0)) fail(ErrorKind::InvalidConfig, "weights must be positive");
  }

  // Escalate lambda until every per-quarter precision and the pooled
  // precision factorize.
  double lam = lambda;
  for (;;) {
    bool ok = true;
    Eigen::MatrixXd precision_sum = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd weighted_mean_sum = Eigen::VectorXd::Zero(p);
    for (std::size_t q = 0; q < q_count && ok; ++q) {
      Eigen::MatrixXd v = ridge_stabilize(fits[q].cov, lam);
      Eigen::LLT<Eigen::MatrixXd> llt(v);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(p, p));
      if (!weights.empty()) prec *= weights[q];
      precision_sum += prec;
      weighted_mean_sum += prec * fits[q].beta;
    }
    if (ok) {
      Eigen::LLT<Eigen::MatrixXd> pooled(precision_sum);
      if (pooled.info() == Eigen::Success) {
        Eigen::VectorXd mean = pooled.solve(weighted_mean_sum);
        Eigen::MatrixXd cov = static_cast<double>(q_count) *
                              pooled.solve(Eigen::MatrixXd::Identity(p, p));
        cov = 0.5 * (cov + cov.transpose());
        std::ostringstream prov;
        prov << "quarters=" << q_count << " lambda=" << lam;
        PriorSpec prior{PriorMethod::Pwp, std::move(mean), std::move(cov),
                        {prov.str()}, fits.front().schema_hash, false};
        validate_prior(prior);
        return prior;
      }
    }
    if (lam >= 1.0)
      fail(ErrorKind::SingularAfterEscalation,
           "pwp covariance pooling failed with lambda escalated to 1");
    lam = std::min(std::max(10.0 * lam, 1e-4), 1.0);
  }
}

PriorSpec last_prior(const CoefEstimate& fit) {
  check_symmetric(fit.cov, ErrorKind::NonPositiveDefinite);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.cov);
  if (eig.eigenvalues().minCoeff() < 1e-12)
    fail(ErrorKind::NonPositiveDefinite,
         "most recent quarter covariance is not positive definite "
         "(min eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()) + ")");
  PriorSpec prior{PriorMethod::Last, fit.beta, fit.cov,
                  {"quarter n_rows=" + std::to_string(fit.n_rows)},
                  fit.schema_hash, false};
  validate_prior(prior);
  return prior;
}

PriorSpec lastz_prior(const CoefEstimate& fit) {
  const Eigen::VectorXd d = fit.cov.diagonal();
  if (!(d.minCoeff() > 0.0))
    fail(ErrorKind::NonPositiveVariance,
         "covariance diagonal must be strictly positive");
  PriorSpec prior{PriorMethod::Lastz, fit.beta,
                  Eigen::MatrixXd(d.asDiagonal()),
                  {"quarter n_rows=" + std::to_string(fit.n_rows)},
                  fit.schema_hash, true};
  validate_prior(prior);
  return prior;
}

std::pair<double, double> probit_to_logit(double estimate, double std_error) {
  if (!(std_error > 0.0))
    fail(ErrorKind::NonPositiveStdError, "std_error must be > 0");
  return {1.61 * estimate, 1.61 * std_error};
}

PriorSpec lit_prior(const std::vector<LitStudyEntry>& entries,
                    const CovariateSchema& schema, const LitFallback& fb) {
  const int p = schema.coefficient_count();
  std::vector<double> est_sum(static_cast<std::size_t>(p), 0.0);
  std::vector<double> var_sum(static_cast<std::size_t>(p), 0.0);
  std::vector<int> count(static_cast<std::size_t>(p), 0);
  std::vector<std::string> studies;
  for (const auto& e : entries) {
    if (!(e.std_error > 0.0))
      fail(ErrorKind::NonPositiveStdError,
           "study '" + e.study + "': std_error must be > 0");
    const int idx = schema.coefficient_index(e.predictor);
    if (idx < 0)
      fail(ErrorKind::UnknownPredictor,
           "study '" + e.study + "': predictor '" + e.predictor +
               "' names no schema coefficient");
    double est = e.estimate;
    double se = e.std_error;
    if (e.scale == LitScale::Probit) std::tie(est, se) = probit_to_logit(est, se);
    est_sum[static_cast<std::size_t>(idx)] += est;
    var_sum[static_cast<std::size_t>(idx)] += se * se;
    ++count[static_cast<std::size_t>(idx)];
    if (std::find(studies.begin(), studies.end(), e.study) == studies.end())
      studies.push_back(e.study);
  }

  Eigen::VectorXd mean(p);
  Eigen::VectorXd variances(p);
  int matched = 0;
  for (int c = 0; c < p; ++c) {
    const auto i = static_cast<std::size_t>(c);
    if (count[i] > 0) {
      mean[c] = est_sum[i] / count[i];
      variances[c] = var_sum[i] / count[i];
      ++matched;
    } else {
      mean[c] = fb.mean;
      variances[c] = fb.variance;
    }
  }
  std::ostringstream prov;
  prov << "studies=" << studies.size() << " matched_coefficients=" << matched
       << "/" << p;
  PriorSpec prior{PriorMethod::Lit, std::move(mean),
                  Eigen::MatrixXd(variances.asDiagonal()), {prov.str()},
                  schema.fingerprint(), true};
  for (const auto& s : studies) prior.provenance.push_back("study " + s);
  validate_prior(prior);
  return prior;
}

}  // namespace rsd
