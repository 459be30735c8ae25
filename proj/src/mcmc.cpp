#include "rsd/mcmc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "rsd/likelihood.hpp"
#include "rsd/mle.hpp"
#include "rsd/rng.hpp"

namespace rsd {

namespace {

Eigen::LLT<Eigen::MatrixXd> prior_chol(const PriorSpec& prior) {
  validate_prior(prior);
  Eigen::LLT<Eigen::MatrixXd> llt(prior.cov);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveDefinitePrior,
         "prior covariance failed Cholesky factorization");
  return llt;
}

double prior_log_kernel(const Eigen::LLT<Eigen::MatrixXd>& llt,
                        const Eigen::VectorXd& centered) {
  return -0.5 * centered.dot(llt.solve(centered));
}

}  // namespace

double log_posterior(const Eigen::VectorXd& beta, const Dataset& data,
                     const PriorSpec& prior) {
  if (beta.size() != prior.mean.size())
    fail(ErrorKind::DimensionMismatch, "beta does not match prior dimension");
  if (data.n_rows() > 0 && beta.size() != data.coefficient_count())
    fail(ErrorKind::DimensionMismatch, "beta does not match dataset width");
  const auto llt = prior_chol(prior);
  double ll = data.n_rows() > 0 ? log_likelihood(beta, data.X, data.y) : 0.0;
  return ll + prior_log_kernel(llt, Eigen::VectorXd(beta - prior.mean));
}

PosteriorDraws sample_posterior(const Dataset& data, const PriorSpec& prior,
                                const McmcConfig& config) {
  const int p = prior.dim();
  if (data.n_rows() > 0 && data.coefficient_count() != p)
    fail(ErrorKind::DimensionMismatch, "prior does not match dataset width");
  if (config.draws < 1) fail(ErrorKind::InvalidConfig, "draws must be >= 1");
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0))
    fail(ErrorKind::InvalidConfig, "target_accept must be in (0, 1)");

  const auto prior_llt = prior_chol(prior);

  // A converged MLE supplies the default chain start. Early-quarter data
  // (tiny n, one outcome class) simply falls back to the prior mean.
  std::optional<CoefEstimate> mle;
  if (data.n_rows() > 0) {
    try {
      CoefEstimate est = fit_mle(data);
      if (est.converged) mle = std::move(est);
    } catch (const Error&) {
    }
  }

  Eigen::VectorXd beta;
  switch (config.init) {
    case McmcInit::Mle:
      beta = mle ? mle->beta : prior.mean;
      break;
    case McmcInit::PriorMean:
      beta = prior.mean;
      break;
    case McmcInit::Zero:
      beta = Eigen::VectorXd::Zero(p);
      break;
  }

  // Proposal shape: inverse of (observed information at the start point +
  // prior precision). With identified data this is essentially the MLE
  // covariance; with none it is the prior covariance; columns the data
  // cannot identify yet (e.g. a phase-2 indicator before phase 2) keep
  // their prior scale instead of collapsing the factorization.
  Eigen::MatrixXd shape_precision =
      prior_llt.solve(Eigen::MatrixXd::Identity(p, p));
  if (data.n_rows() > 0)
    shape_precision -= log_likelihood_hessian(beta, data.X, data.y);
  shape_precision = 0.5 * (shape_precision + shape_precision.transpose());
  Eigen::LLT<Eigen::MatrixXd> precision_llt(shape_precision);
  if (precision_llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveDefinitePrior,
         "proposal precision failed Cholesky factorization");
  Eigen::MatrixXd proposal_shape =
      precision_llt.solve(Eigen::MatrixXd::Identity(p, p));
  proposal_shape = 0.5 * (proposal_shape + proposal_shape.transpose());
  Eigen::LLT<Eigen::MatrixXd> shape_llt(proposal_shape);
  if (shape_llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveDefinitePrior,
         "proposal covariance failed Cholesky factorization");
  const Eigen::MatrixXd chol_L = shape_llt.matrixL();

  const bool have_data = data.n_rows() > 0;
  auto log_post = [&](const Eigen::VectorXd& b) {
    double ll = have_data ? log_likelihood(b, data.X, data.y) : 0.0;
    return ll + prior_log_kernel(prior_llt, Eigen::VectorXd(b - prior.mean));
  };

  double log_step = std::log(config.initial_step_scale > 0.0
                                 ? config.initial_step_scale
                                 : 2.38 / std::sqrt(static_cast<double>(p)));
  double current_lp = log_post(beta);

  Rng rng(config.seed);
  Eigen::VectorXd z(p);
  auto propose_and_step = [&]() -> bool {
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    Eigen::VectorXd cand = beta + std::exp(log_step) * (chol_L * z);
    const double cand_lp = log_post(cand);
    const double u = rng.uniform_pos();
    if (std::log(u) < cand_lp - current_lp) {
      beta = std::move(cand);
      current_lp = cand_lp;
      return true;
    }
    return false;
  };

  // Tuning: Robbins-Monro on log step scale, batch acceptance vs target.
  for (int loop = 0; loop < config.tune_loops; ++loop) {
    int accepted = 0;
    for (int i = 0; i < config.tune_len; ++i)
      if (propose_and_step()) ++accepted;
    if (config.tune_len > 0) {
      const double rate =
          static_cast<double>(accepted) / static_cast<double>(config.tune_len);
      log_step += (rate - config.target_accept) /
                  std::sqrt(static_cast<double>(loop + 1));
    }
  }

  for (int i = 0; i < config.burn_in; ++i) propose_and_step();

  Eigen::MatrixXd draws(config.draws, p);
  int accepted = 0;
  for (int k = 0; k < config.draws; ++k) {
    if (propose_and_step()) ++accepted;
    draws.row(k) = beta;
  }

  return PosteriorDraws{std::move(draws),
                        static_cast<double>(accepted) / config.draws,
                        std::exp(log_step), config};
}

double posterior_mean_prediction(const PosteriorDraws& draws,
                                 const Eigen::VectorXd& x) {
  if (x.size() != draws.dim())
    fail(ErrorKind::DimensionMismatch, "design row does not match draw width");
  const Eigen::VectorXd eta = draws.draws * x;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) sum += inverse_logit(eta[k]);
  return sum / static_cast<double>(eta.size());
}

Eigen::VectorXd posterior_mean_predictions(const PosteriorDraws& draws,
                                           const Eigen::MatrixXd& X) {
  if (X.cols() != draws.dim())
    fail(ErrorKind::DimensionMismatch, "design rows do not match draw width");
  Eigen::MatrixXd eta = X * draws.draws.transpose();  // rows x draws
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < eta.cols(); ++k)
      sum += inverse_logit(eta(i, k));
    out[i] = sum / static_cast<double>(eta.cols());
  }
  return out;
}

Eigen::VectorXd effective_sample_size(const Eigen::MatrixXd& draws) {
  const Eigen::Index k = draws.rows();
  Eigen::VectorXd ess(draws.cols());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    const Eigen::VectorXd x = draws.col(c).array() - draws.col(c).mean();
    const double c0 = x.squaredNorm() / static_cast<double>(k);
    if (c0 <= 0.0) {
      ess[c] = static_cast<double>(k);
      continue;
    }
    auto rho = [&](Eigen::Index lag) {
      double s = 0.0;
      for (Eigen::Index i = 0; i + lag < k; ++i) s += x[i] * x[i + lag];
      return s / (static_cast<double>(k) * c0);
    };
    // Sum Geyer pairs while they stay positive.
    double tau = -1.0;
    for (Eigen::Index m = 0; 2 * m + 1 < k; ++m) {
      const double pair = rho(2 * m) + rho(2 * m + 1);
      if (pair <= 0.0) break;
      tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0);
    ess[c] = std::min(static_cast<double>(k), static_cast<double>(k) / tau);
  }
  return ess;
}

}  // namespace rsd
