#pragma once

#include <Eigen/Core>

#include "rsd/schema.hpp"

namespace rsd {

// exp(eta)/(1+exp(eta)), overflow-safe, clamped into the open unit interval.
double inverse_logit(double eta);

// Bernoulli log-likelihood sum over rows: y*eta - log(1+exp(eta)).
// Matrix overloads are the hot path; Dataset overloads validate dimensions.
double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y);
double log_likelihood(const Eigen::VectorXd& beta, const Dataset& data);

// Score: sum_i x_i (y_i - p_i).
Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& beta,
                                        const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y);
Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& beta,
                                        const Dataset& data);

// -sum_i p_i (1-p_i) x_i x_i^T (negative semidefinite).
Eigen::MatrixXd log_likelihood_hessian(const Eigen::VectorXd& beta,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y);
Eigen::MatrixXd log_likelihood_hessian(const Eigen::VectorXd& beta,
                                       const Dataset& data);

// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
  double a = eta > 0.0 ? eta : 0.0;
  return a + std::log1p(std::exp(-std::abs(eta)));
}

// Log-likelihood for a precomputed linear predictor; shared by the sampler.
double log_likelihood_eta(const Eigen::VectorXd& eta, const Eigen::VectorXd& y);

}  // namespace rsd
