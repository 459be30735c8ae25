#include <doctest.h>

#include <cmath>

#include "rsd/math.hpp"
#include "support.hpp"

using namespace rsd;

TEST_CASE("chi-square upper tail against the series oracle") {
  for (int df : {1, 2, 3, 5, 8, 10, 20}) {
    for (double x : {0.01, 0.5, 1.0, 2.5, 7.0, 15.0, 40.0}) {
      CHECK(chi_sq_upper_tail(df, x) ==
            doctest::Approx(testsupport::chi_sq_upper_oracle(df, x))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("chi-square tail pinned values") {
  // df=2 has the closed form exp(-x/2).
  CHECK(chi_sq_upper_tail(2, 3.0) ==
        doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(chi_sq_upper_tail(5, 0.0) == 1.0);
  // df=0 is the degenerate point mass at zero.
  CHECK(chi_sq_upper_tail(0, 0.0) == 1.0);
  CHECK(chi_sq_upper_tail(0, 1e-9) == 0.0);
}

TEST_CASE("gamma_p and gamma_q are complements") {
  for (double a : {0.5, 1.0, 2.5, 10.0}) {
    for (double x : {0.1, 1.0, 3.0, 12.0}) {
      CHECK(gamma_p(a, x) + gamma_q(a, x) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("summary statistics hand values") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(mean(v) == 2.5);
  CHECK(median(v) == 2.5);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(v, 0.75) == doctest::Approx(3.25));
  CHECK(iqr(v) == doctest::Approx(1.5));
  CHECK(sample_sd({0.1, -0.1}) ==
        doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
}
