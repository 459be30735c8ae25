#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "rsd/schema.hpp"

namespace rsd {

struct MleOptions {
  double tol = 1e-8;                  // max |score| stopping rule
  int max_iter = 100;
  double ridge_on_separation = 1e-4;  // quadratic penalty used on fallback
};

// Fitted coefficients with their covariance (inverse observed information).
// When `converged` is false the fit came from the penalized fallback and
// `cov` may be singular (PSD, not PD).
struct CoefEstimate {
  std::string schema_hash;
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov;
  int n_rows = 0;
  bool converged = false;
  double loglik = 0.0;
};

CoefEstimate fit_mle(const Dataset& data, const MleOptions& opts = {});

struct FitStats {
  double nagelkerke_r2 = 0.0;
  double auc = 0.0;
  double hl_stat = 0.0;
  double hl_pvalue = 0.0;
  int hl_groups = 0;
};

double nagelkerke_r2(const CoefEstimate& est, const Dataset& data);

// Mann-Whitney concordance; ties count one half.
double auc(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);

// Deciles-of-risk statistic and chi-square upper-tail p-value (df = groups-2).
std::pair<double, double> hosmer_lemeshow(const Eigen::VectorXd& pred,
                                          const Eigen::VectorXd& y,
                                          int groups = 10);

FitStats fit_stats(const CoefEstimate& est, const Dataset& data, int groups = 10);

// Fitted probabilities for every row of `data`.
Eigen::VectorXd fitted_probabilities(const CoefEstimate& est, const Dataset& data);

}  // namespace rsd
