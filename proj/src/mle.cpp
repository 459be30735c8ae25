#include "rsd/mle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsd/likelihood.hpp"
#include "rsd/math.hpp"

namespace rsd {

namespace {

constexpr double kDivergedBeta = 15.0;

struct NewtonResult {
  Eigen::VectorXd beta;
  bool converged = false;
  bool diverged = false;  // |beta| blow-up or singular Hessian seen
};

// Plain Newton ascent with step halving; `ridge` > 0 optimizes the
// penalized objective ll - ridge * |beta|^2.
NewtonResult newton(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    double tol, int max_iter, double ridge) {
  const Eigen::Index p = X.cols();
  NewtonResult res{Eigen::VectorXd::Zero(p), false, false};
  double obj = log_likelihood(res.beta, X, y);
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd g = log_likelihood_gradient(res.beta, X, y);
    if (ridge > 0.0) g -= 2.0 * ridge * res.beta;
    if (g.lpNorm<Eigen::Infinity>() < tol) {
      res.converged = true;
      return res;
    }
    Eigen::MatrixXd info = -log_likelihood_hessian(res.beta, X, y);
    if (ridge > 0.0) info.diagonal().array() += 2.0 * ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      res.diverged = true;
      return res;
    }
    Eigen::VectorXd step = llt.solve(g);
    // Step halving guards real divergence only; the slack scales with the
    // objective so float noise at large n cannot stall the iteration.
    const double slack = 1e-9 * (1.0 + std::abs(obj));
    double scale = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      Eigen::VectorXd cand = res.beta + scale * step;
      double cand_obj = log_likelihood(cand, X, y);
      if (ridge > 0.0) cand_obj -= ridge * cand.squaredNorm();
      if (std::isfinite(cand_obj) && cand_obj >= obj - slack) {
        res.beta = cand;
        obj = cand_obj;
        break;
      }
      scale *= 0.5;
    }
    if (!res.beta.allFinite() ||
        res.beta.lpNorm<Eigen::Infinity>() > kDivergedBeta) {
      res.diverged = true;
      return res;
    }
  }
  return res;
}

// Inverse of the observed information via eigendecomposition. Eigenvalues
// at or below the relative cutoff contribute zero, so a singular
// information matrix yields a PSD (not PD) covariance that downstream
// consumers can detect instead of overflowing.
Eigen::MatrixXd information_inverse(const Eigen::MatrixXd& info, bool* full_rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv_vals(vals.size());
  *full_rank = true;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] > cutoff) {
      inv_vals[i] = 1.0 / vals[i];
    } else {
      inv_vals[i] = 0.0;
      *full_rank = false;
    }
  }
  Eigen::MatrixXd cov =
      eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (cov + cov.transpose());
}

}  // namespace

CoefEstimate fit_mle(const Dataset& data, const MleOptions& opts) {
  const int n = data.n_rows();
  const int p = data.coefficient_count();
  if (n < p)
    fail(ErrorKind::DegenerateData,
         "fewer rows (" + std::to_string(n) + ") than coefficients (" +
             std::to_string(p) + ")");
  const double successes = data.y.sum();
  if (successes == 0.0 || successes == static_cast<double>(n))
    fail(ErrorKind::DegenerateData, "all outcomes are in one class");

  NewtonResult fit = newton(data.X, data.y, opts.tol, opts.max_iter, 0.0);
  bool converged = fit.converged;
  if (!fit.converged) {
    fit = newton(data.X, data.y, opts.tol, opts.max_iter,
                 opts.ridge_on_separation);
    converged = false;
  }

  Eigen::MatrixXd info = -log_likelihood_hessian(fit.beta, data.X, data.y);
  bool full_rank = false;
  Eigen::MatrixXd cov = information_inverse(info, &full_rank);
  if (!full_rank) converged = false;

  return CoefEstimate{data.schema.fingerprint(), fit.beta, std::move(cov), n,
                      converged, log_likelihood(fit.beta, data.X, data.y)};
}

Eigen::VectorXd fitted_probabilities(const CoefEstimate& est, const Dataset& data) {
  if (est.beta.size() != data.coefficient_count())
    fail(ErrorKind::DimensionMismatch, "estimate does not match dataset width");
  Eigen::VectorXd eta = data.X * est.beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = inverse_logit(eta[i]);
  return eta;
}

double nagelkerke_r2(const CoefEstimate& est, const Dataset& data) {
  const double n = static_cast<double>(data.n_rows());
  const double s = data.y.sum();
  const double f = n - s;
  if (n == 0.0 || s == 0.0 || f == 0.0)
    fail(ErrorKind::DegenerateData, "need both outcome classes");
  const double l0 = s * std::log(s / n) + f * std::log(f / n);
  const double l1 = log_likelihood(est.beta, data);
  const double cox_snell = 1.0 - std::exp(2.0 * (l0 - l1) / n);
  const double max_r2 = 1.0 - std::exp(2.0 * l0 / n);
  return cox_snell / max_r2;
}

double auc(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
  if (pred.size() != y.size())
    fail(ErrorKind::DimensionMismatch, "pred and y differ in length");
  const Eigen::Index n = pred.size();
  double n_pos = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) n_pos += y[i];
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    fail(ErrorKind::DegenerateData, "need at least one positive and one negative");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return pred[a] < pred[b]; });

  // Average ranks within tied prediction blocks make ties count one half.
  double rank_sum_pos = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && pred[order[j + 1]] == pred[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k)
      if (y[order[k]] == 1.0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::pair<double, double> hosmer_lemeshow(const Eigen::VectorXd& pred,
                                          const Eigen::VectorXd& y,
                                          int groups) {
  if (groups < 2) fail(ErrorKind::TooFewGroups, "need groups >= 2");
  const Eigen::Index n = pred.size();
  if (pred.size() != y.size())
    fail(ErrorKind::DimensionMismatch, "pred and y differ in length");
  if (n < 2 * groups)
    fail(ErrorKind::DegenerateData, "need at least 2*groups observations");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return pred[a] < pred[b]; });

  double stat = 0.0;
  for (int g = 0; g < groups; ++g) {
    const Eigen::Index lo = n * g / groups;
    const Eigen::Index hi = n * (g + 1) / groups;
    const double n_g = static_cast<double>(hi - lo);
    double observed = 0.0;
    double expected = 0.0;
    for (Eigen::Index k = lo; k < hi; ++k) {
      observed += y[order[k]];
      expected += pred[order[k]];
    }
    const double denom = expected * (1.0 - expected / n_g);
    stat += (observed - expected) * (observed - expected) / denom;
  }
  const double df = static_cast<double>(groups - 2);
  return {stat, chi_sq_upper_tail(df, stat)};
}

FitStats fit_stats(const CoefEstimate& est, const Dataset& data, int groups) {
  const Eigen::VectorXd pred = fitted_probabilities(est, data);
  auto [hl_stat, hl_p] = hosmer_lemeshow(pred, data.y, groups);
  return FitStats{nagelkerke_r2(est, data), auc(pred, data.y), hl_stat, hl_p,
                  groups};
}

}  // namespace rsd
