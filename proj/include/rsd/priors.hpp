#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "rsd/mle.hpp"
#include "rsd/schema.hpp"

namespace rsd {

enum class PriorMethod { Standard, Pwp, Last, Lastz, Lit };

const char* to_string(PriorMethod m);
PriorMethod prior_method_from_string(const std::string& s);

// Multivariate normal prior over the coefficient vector. Constructors
// guarantee a symmetric PSD covariance except where a method is specified
// to surface bad inputs (last_prior).
struct PriorSpec {
  PriorMethod method = PriorMethod::Standard;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::vector<std::string> provenance;
  std::string schema_hash;  // empty when the source carries no schema
  bool diagonal = false;    // serialization hint

  int dim() const { return static_cast<int>(mean.size()); }
};

// Symmetry + PSD check (Cholesky with 1e-10 tolerance); throws
// NonPositiveDefinitePrior on failure.
void validate_prior(const PriorSpec& prior);

// Non-informative N(0, variance * I).
PriorSpec standard_prior(int dim, double variance = 1e6);

// (1-lambda) V + lambda diag(V); shrinks off-diagonals, keeps the diagonal.
Eigen::MatrixXd ridge_stabilize(const Eigen::MatrixXd& V, double lambda);

// Precision-weighted pooling over historical quarter fits: the prior mean
// weights quarters by their precision, the prior variance is the inverse of
// the mean precision. Per-quarter covariances are ridge-stabilized before
// inversion; lambda escalates (x10, capped at 1) until every Cholesky
// succeeds, and the final lambda is recorded in provenance.
PriorSpec pwp_prior(const std::vector<CoefEstimate>& fits, double lambda = 0.003,
                    const std::vector<double>& weights = {});

// Most recent quarter, mean and full covariance passed through unchanged.
// Surfaces non-PD covariances (min eigenvalue < 1e-12) instead of repairing.
PriorSpec last_prior(const CoefEstimate& fit);

// Most recent quarter with all covariances zeroed (independent normals).
PriorSpec lastz_prior(const CoefEstimate& fit);

// Amemiya's approximation: probit estimates scale by 1.61 to the logit scale.
std::pair<double, double> probit_to_logit(double estimate, double std_error);

enum class LitScale { Logit, Probit };

// One reported coefficient from a published response-propensity model.
struct LitStudyEntry {
  std::string study;
  int year = 0;
  std::string predictor;  // must name a schema coefficient
  LitScale scale = LitScale::Logit;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct LitFallback {
  double mean = 0.0;
  double variance = 10.0;
};

// Per-coefficient pooling of literature estimates: mean of the reported
// coefficients and mean of the reported variances, probit entries converted
// first; coefficients without evidence fall back to N(0, 10). Covariances
// are zero (independent normals).
PriorSpec lit_prior(const std::vector<LitStudyEntry>& entries,
                    const CovariateSchema& schema, const LitFallback& fb = {});

}  // namespace rsd
