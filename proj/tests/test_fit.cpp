#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/error.hpp"
#include "lab/fit.hpp"

using namespace lab;

TEST_SUITE("fit") {

TEST_CASE("exact power law") {
  std::vector<double> x, y;
  for (int k = 4; k <= 12; ++k) {
    x.push_back(std::ldexp(1.0, k));
    y.push_back(std::pow(x.back(), -0.75));
  }
  const auto f = fit::fit_slope(x, y);
  CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flat data") {
  const std::vector<double> x{1, 2, 4, 8, 16}, y(5, 3.0);
  const auto f = fit::fit_slope(x, y);
  CHECK(f.slope == doctest::Approx(0.0).scale(1e-15));
  CHECK(f.r2 == 1.0);
}

TEST_CASE("perturbed power law") {
  std::vector<double> x, y;
  for (int k = 0; k < 10; ++k) {
    x.push_back(std::ldexp(1.0, k + 3));
    y.push_back(3.0 / x.back() * (1.0 + 0.01 * (k % 2 ? 1.0 : -1.0)));
  }
  CHECK(std::abs(fit::fit_slope(x, y).slope + 1.0) <= 0.01);
}

TEST_CASE("dropping the smallest rows") {
  // Unsorted input; the two smallest x carry outliers.
  const std::vector<double> x{64, 2, 32, 1, 16, 8, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(v <= 2 ? 100.0 : 5.0 / v);
  const auto f = fit::fit_slope(x, y, 2);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("validation") {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 2, -3, 4};
  CHECK_THROWS_AS(fit::fit_slope(x, y), InputError);
  CHECK_THROWS_AS(fit::fit_slope(x, std::vector<double>{1, 2, 3}), InputError);
  CHECK_THROWS_AS(fit::fit_slope(x, std::vector<double>{1, 2, 3, 4}, 1), InputError);
}

}  // TEST_SUITE
