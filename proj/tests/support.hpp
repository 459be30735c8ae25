#pragma once

// Shared helpers and independent oracles. Everything here recomputes results
// from first principles (naive probability formulas, finite differences,
// series expansions, hand-rolled elimination) so the checks stay independent
// of the library code paths they audit.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rsd/rng.hpp"
#include "rsd/schema.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_design(rsd::Rng& rng, int n, int coef_count) {
  Eigen::MatrixXd X(n, coef_count);
  X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < coef_count; ++j) X(i, j) = rng.normal();
  return X;
}

inline Eigen::VectorXd random_beta(rsd::Rng& rng, int coef_count,
                                   double scale = 0.8) {
  Eigen::VectorXd beta(coef_count);
  for (int j = 0; j < coef_count; ++j) beta[j] = scale * rng.normal();
  return beta;
}

inline Eigen::VectorXd bernoulli_outcomes(rsd::Rng& rng,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& beta) {
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-X.row(i).dot(beta)));
    y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  return y;
}

inline rsd::Dataset random_dataset(rsd::Rng& rng, int n, int coef_count,
                                   double beta_scale = 0.8) {
  const Eigen::MatrixXd X = random_design(rng, n, coef_count);
  const Eigen::VectorXd beta = random_beta(rng, coef_count, beta_scale);
  return rsd::Dataset::from_matrix(X, bernoulli_outcomes(rng, X, beta));
}

// Naive per-row evaluation: p directly, then log p / log(1-p), with the
// complement computed through the mirrored direct formula 1-p(eta) = p(-eta).
inline double naive_log_likelihood(const Eigen::VectorXd& beta,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double eta = X.row(i).dot(beta);
    const double prob_of_row =
        y[i] == 1.0 ? 1.0 / (1.0 + std::exp(-eta)) : 1.0 / (1.0 + std::exp(eta));
    ll += std::log(prob_of_row);
  }
  return ll;
}

inline Eigen::VectorXd naive_gradient(const Eigen::VectorXd& beta,
                                      const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(beta.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-X.row(i).dot(beta)));
    g += (y[i] - p) * X.row(i).transpose();
  }
  return g;
}

inline Eigen::MatrixXd naive_hessian(const Eigen::VectorXd& beta,
                                     const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y) {
  (void)y;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(beta.size(), beta.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-X.row(i).dot(beta)));
    h -= p * (1.0 - p) * X.row(i).transpose() * X.row(i);
  }
  return h;
}

// Central finite differences of the naive log-likelihood.
inline Eigen::VectorXd fd_gradient(const Eigen::VectorXd& beta,
                                   const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double h = 1e-5) {
  Eigen::VectorXd g(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    Eigen::VectorXd hi = beta;
    Eigen::VectorXd lo = beta;
    hi[j] += h;
    lo[j] -= h;
    g[j] = (naive_log_likelihood(hi, X, y) - naive_log_likelihood(lo, X, y)) /
           (2.0 * h);
  }
  return g;
}

// Central finite differences of the naive gradient.
inline Eigen::MatrixXd fd_hessian(const Eigen::VectorXd& beta,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y, double h = 1e-4) {
  Eigen::MatrixXd m(beta.size(), beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    Eigen::VectorXd hi = beta;
    Eigen::VectorXd lo = beta;
    hi[j] += h;
    lo[j] -= h;
    m.col(j) = (naive_gradient(hi, X, y) - naive_gradient(lo, X, y)) / (2.0 * h);
  }
  return m;
}

inline double rel_err_inf(const Eigen::VectorXd& got,
                          const Eigen::VectorXd& want) {
  return (got - want).lpNorm<Eigen::Infinity>() /
         std::max(1.0, want.lpNorm<Eigen::Infinity>());
}

inline double rel_err_inf(const Eigen::MatrixXd& got,
                          const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() /
         std::max(1.0, want.cwiseAbs().maxCoeff());
}

// Gauss-Jordan solve with partial pivoting; no library solver involved.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    a.row(col).swap(a.row(pivot));
    std::swap(b[col], b[pivot]);
    const double d = a(col, col);
    a.row(col) /= d;
    b[col] /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      a.row(r) -= f * a.row(col);
      b[r] -= f * b[col];
    }
  }
  return b;
}

// Plain Newton from zero with naive derivatives and the hand-rolled solver;
// the independent route against fit_mle.
inline Eigen::VectorXd independent_newton(const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y,
                                          int iters = 50) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd g = naive_gradient(beta, X, y);
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    beta += gauss_solve(-naive_hessian(beta, X, y), g);
  }
  return beta;
}

// Series-only regularized lower incomplete gamma in extended precision;
// upper chi-square tail derived from it.
inline double chi_sq_upper_oracle(int df, double x) {
  if (df == 0) return x <= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 1.0;
  const long double a = 0.5L * df;
  const long double xx = 0.5L * x;
  long double term = 1.0L / a;
  long double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= xx / (a + k);
    sum += term;
    if (term < sum * 1e-20L) break;
  }
  const long double log_p = -xx + a * std::log(xx) + std::log(sum) - std::lgamma(a);
  return static_cast<double>(1.0L - std::exp(log_p));
}

}  // namespace testsupport
