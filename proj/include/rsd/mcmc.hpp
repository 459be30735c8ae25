#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "rsd/priors.hpp"
#include "rsd/schema.hpp"

namespace rsd {

enum class McmcInit { Mle, PriorMean, Zero };

struct McmcConfig {
  int tune_loops = 100;      // adaptation batches
  int tune_len = 50;         // proposals per batch
  int burn_in = 1000;        // discarded after adaptation freezes
  int draws = 5000;          // retained, unthinned
  std::uint64_t seed = 0;
  double target_accept = 0.234;
  McmcInit init = McmcInit::Mle;  // falls back to the prior mean when the
                                  // MLE is unavailable or not converged
  double initial_step_scale = 0.0;  // <= 0 picks 2.38 / sqrt(dim)
};

struct PosteriorDraws {
  Eigen::MatrixXd draws;  // draws x coefficients
  double accept_rate = 0.0;       // over the retained-draw phase
  double final_step_scale = 0.0;  // after adaptation froze
  McmcConfig config;

  int n_draws() const { return static_cast<int>(draws.rows()); }
  int dim() const { return static_cast<int>(draws.cols()); }
};

// Unnormalized log posterior: log-likelihood plus the normal prior kernel
// -(beta-mean)' cov^{-1} (beta-mean) / 2 (additive constants dropped).
double log_posterior(const Eigen::VectorXd& beta, const Dataset& data,
                     const PriorSpec& prior);

// Adaptive Gaussian random-walk Metropolis. The proposal covariance is
// s^2 * Sigma with Sigma the converged-MLE covariance when one exists,
// otherwise the prior covariance; log s adapts toward target_accept during
// the tuning batches and then freezes. Deterministic for a fixed seed;
// works on datasets with a single outcome class (or none at all).
PosteriorDraws sample_posterior(const Dataset& data, const PriorSpec& prior,
                                const McmcConfig& config);

// Average over draws of inverse_logit(beta' x) — the average of the
// per-draw probabilities, not the probability at the average draw.
double posterior_mean_prediction(const PosteriorDraws& draws,
                                 const Eigen::VectorXd& x);
Eigen::VectorXd posterior_mean_predictions(const PosteriorDraws& draws,
                                           const Eigen::MatrixXd& X);

// Per-component effective sample size from the initial positive sequence
// of paired autocorrelations (Geyer).
Eigen::VectorXd effective_sample_size(const Eigen::MatrixXd& draws);

}  // namespace rsd
