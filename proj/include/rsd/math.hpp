#pragma once

#include <vector>

namespace rsd {

// Regularized incomplete gamma functions, accurate to ~1e-12 over the ranges
// used here (series for x < a+1, Lentz continued fraction otherwise).
double gamma_p(double a, double x);  // P(a, x), lower
double gamma_q(double a, double x);  // Q(a, x), upper

// Upper-tail probability of a chi-square distribution. df = 0 is the
// degenerate point mass at zero: returns 1 for x <= 0, else 0.
double chi_sq_upper_tail(double df, double x);

double mean(const std::vector<double>& v);

// Sample standard deviation (n-1 denominator).
double sample_sd(const std::vector<double>& v);

// Linear-interpolation quantile (type 7); q in [0, 1]. Input need not be
// sorted. Empty input is the caller's error.
double quantile(std::vector<double> v, double q);

double median(const std::vector<double>& v);

// Q3 - Q1 under the same quantile convention.
double iqr(const std::vector<double>& v);

}  // namespace rsd
