#include "rsd/likelihood.hpp"

#include <cmath>

namespace rsd {

namespace {

void check_dims(const Eigen::VectorXd& beta, const Dataset& data) {
  if (beta.size() != data.coefficient_count())
    fail(ErrorKind::DimensionMismatch,
         "beta has " + std::to_string(beta.size()) + " entries, schema has " +
             std::to_string(data.coefficient_count()) + " coefficients");
}

}  // namespace

double inverse_logit(double eta) {
  double p;
  if (eta >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-eta));
  } else {
    const double e = std::exp(eta);
    p = e / (1.0 + e);
  }
  if (p >= 1.0) p = std::nextafter(1.0, 0.0);
  if (p <= 0.0) p = std::nextafter(0.0, 1.0);
  return p;
}

double log_likelihood_eta(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  return log_likelihood_eta(X * beta, y);
}

double log_likelihood(const Eigen::VectorXd& beta, const Dataset& data) {
  check_dims(beta, data);
  return log_likelihood(beta, data.X, data.y);
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& beta,
                                        const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y) {
  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    resid[i] = y[i] - inverse_logit(eta[i]);
  return X.transpose() * resid;
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& beta,
                                        const Dataset& data) {
  check_dims(beta, data);
  return log_likelihood_gradient(beta, data.X, data.y);
}

Eigen::MatrixXd log_likelihood_hessian(const Eigen::VectorXd& beta,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y) {
  (void)y;
  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = inverse_logit(eta[i]);
    w[i] = p * (1.0 - p);
  }
  return -(X.transpose() * w.asDiagonal() * X);
}

Eigen::MatrixXd log_likelihood_hessian(const Eigen::VectorXd& beta,
                                       const Dataset& data) {
  check_dims(beta, data);
  return log_likelihood_hessian(beta, data.X, data.y);
}

}  // namespace rsd
