#include <doctest.h>

#include <cmath>

#include "lab/error.hpp"
#include "lab/rates.hpp"

using namespace lab;
using namespace lab::rates;

TEST_SUITE("rates") {

TEST_CASE("kgf_curve_exponent examples") {
  CHECK(kgf_curve_exponent(1.5, 2.0, 0.5).n_exponent == doctest::Approx(-0.75));
  const auto sat = kgf_curve_exponent(1.0, 2.0, 2.5);
  CHECK(sat.saturated);
  CHECK(kgf_curve_exponent(1.0, 2.0, 2.0).saturated);
  double prev = -1.0;
  for (double th : {1e-1, 1e-2, 1e-4, 1e-8}) {
    const double e = kgf_curve_exponent(1.0, 2.0, th).n_exponent;
    CHECK(e < 0.0);
    CHECK(e > prev);
    prev = e;
  }
  CHECK(prev > -1e-7);
  CHECK_THROWS_AS(kgf_curve_exponent(1.0, 1.0, 0.5), InputError);
  CHECK_THROWS_AS(kgf_curve_exponent(0.0, 2.0, 0.5), InputError);
  CHECK_THROWS_AS(kgf_curve_exponent(1.0, 2.0, 0.0), InputError);
}

TEST_CASE("minimax_exponent examples") {
  const auto m = minimax_exponent(1.5, 2.0);
  CHECK(m.exponent == doctest::Approx(0.75));
  CHECK(m.theta_star == doctest::Approx(0.5));
  // Sobolev W^{2,2} on d = 1 seen through a kernel with beta = 4, s = 1
  CHECK(minimax_exponent(1.0, 4.0).exponent == doctest::Approx(0.8));
  CHECK(minimax_exponent(1e9, 2.0).exponent == doctest::Approx(1.0).epsilon(1e-8));
  const auto inf = minimax_exponent(INFINITY, 2.0);
  CHECK(inf.exponent == 1.0);
  CHECK(inf.theta_star == 0.0);
  // KRR caps the source condition at 2
  CHECK(minimax_exponent(5.0, 2.0, Estimator::Krr).exponent == doctest::Approx(0.8));
  CHECK(kgf_curve_exponent(5.0, 2.0, 0.1, Estimator::Krr).n_exponent == doctest::Approx(-0.2));
}

TEST_CASE("minimizing the curve exponent over theta gives the minimax rate") {
  for (double s : {0.3, 0.5, 1.0, 1.5, 3.0})
    for (double beta : {1.5, 2.0, 4.0}) {
      double best = 0.0, arg = 0.0;
      for (int i = 1; i < 20000; ++i) {
        const double th = beta * i / 20000.0;
        const double e = kgf_curve_exponent(s, beta, th).n_exponent;
        if (e < best) {
          best = e;
          arg = th;
        }
      }
      const auto m = minimax_exponent(s, beta);
      CHECK(best == doctest::Approx(-m.exponent).epsilon(1e-3));
      CHECK(arg == doctest::Approx(m.theta_star).epsilon(1e-3));
    }
}

TEST_CASE("high-dimensional KRR hand-derived table") {
  auto a = highdim_krr_exponents(0.5, 1.2);
  CHECK(*a.d_exponent == -0.5);
  CHECK(a.period == 0);
  CHECK(a.branch == 2);
  auto b = highdim_krr_exponents(1.5, 2.0);
  CHECK(*b.d_exponent == -1.5);
  CHECK(b.period == 0);
  CHECK(b.branch == 2);
  auto c = highdim_krr_exponents(0.5, 0.3);
  CHECK(*c.d_exponent == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(c.n_exponent == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.branch == 1);
  // s > 2 uses the s = 2 formulas
  CHECK(*highdim_krr_exponents(3.7, 2.6).d_exponent == *highdim_krr_exponents(2.0, 2.6).d_exponent);
}

TEST_CASE("high-dimensional KRR is continuous in gamma within a period") {
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    double prev = *highdim_krr_exponents(s, 1e-3).d_exponent;
    for (int i = 2; i <= 6000; ++i) {
      const double g = i * 1e-3;
      const auto r = highdim_krr_exponents(s, g);
      const auto before = highdim_krr_exponents(s, g - 1e-3);
      if (r.period == before.period) CHECK(std::abs(*r.d_exponent - prev) <= 1e-3 + 1e-12);
      CHECK(*r.d_exponent <= 0.0);
      prev = *r.d_exponent;
    }
  }
}

TEST_CASE("interpolation exponent") {
  CHECK(*interpolation_exponent(2.0, 1.5).d_exponent == -0.5);
  auto i1 = interpolation_exponent(1.0, 1.0);
  CHECK(*i1.d_exponent == 0.0);
  CHECK(i1.inconsistent);
  auto i0 = interpolation_exponent(0.0, 1.5);
  CHECK(*i0.d_exponent == 0.0);
  CHECK(i0.inconsistent);
  for (int g = 1; g <= 6; ++g) CHECK(interpolation_exponent(0.7, g).inconsistent);

  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0})
    for (int i = 1; i <= 500; ++i) {
      const double g = i * 0.0123;
      const auto r = interpolation_exponent(s, g);
      CHECK(*r.d_exponent <= 0.0);
      const bool on_set = s == 0.0 || g == std::floor(g);
      CHECK(r.inconsistent == on_set);
    }
}

TEST_CASE("regularized KRR never worse than interpolation for s in (0,1]") {
  for (double s : {0.1, 0.3, 0.5, 0.8, 1.0})
    for (int i = 1; i <= 400; ++i) {
      const double g = i * 0.0137;
      CHECK(*highdim_krr_exponents(s, g).d_exponent <= *interpolation_exponent(s, g).d_exponent + 1e-12);
    }
}

}  // TEST_SUITE
