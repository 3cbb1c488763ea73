#include "lab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lab/error.hpp"

namespace lab::rates {

namespace {

void check_beta(double beta) {
  if (!(beta > 1.0) || std::isinf(beta)) throw InputError("rates: beta must be finite and > 1");
}

double effective_s(double s, Estimator est) { return est == Estimator::Krr ? std::min(s, 2.0) : s; }

// -0.0 prints as "-0"; keep table output clean.
double tidy(double v) { return v == 0.0 ? 0.0 : v; }

}  // namespace

RateResult kgf_curve_exponent(double s, double beta, double theta, Estimator est) {
  if (!(s > 0.0)) throw InputError("kgf_curve_exponent: s must be > 0");
  check_beta(beta);
  if (!(theta > 0.0) || std::isinf(theta)) throw InputError("kgf_curve_exponent: theta must be > 0");
  RateResult r;
  r.regime = Regime::FixedDim;
  if (theta >= beta) {
    r.saturated = true;
    r.n_exponent = 0.0;
    r.label = "saturated (theta >= beta)";
    return r;
  }
  const double se = effective_s(s, est);
  const double bias = se * theta, variance = 1.0 - theta / beta;
  r.n_exponent = tidy(-std::min(bias, variance));
  r.label = bias <= variance ? "bias-limited" : "variance-limited";
  if (est == Estimator::Krr && s > 2.0) r.label += ", KRR saturation s -> 2";
  return r;
}

Minimax minimax_exponent(double s, double beta, Estimator est) {
  if (!(s > 0.0)) throw InputError("minimax_exponent: s must be > 0");
  check_beta(beta);
  const double se = effective_s(s, est);
  if (std::isinf(se)) return {1.0, 0.0};
  return {se * beta / (se * beta + 1.0), beta / (se * beta + 1.0)};
}

RateResult highdim_krr_exponents(double s, double gamma) {
  if (!(s > 0.0)) throw InputError("highdim_krr_exponents: s must be > 0");
  if (!(gamma > 0.0) || std::isinf(gamma)) throw InputError("highdim_krr_exponents: gamma must be > 0");
  RateResult r;
  r.regime = Regime::HighDimKrr;
  const double se = std::min(s, 2.0);

  // gamma in (p(1+s), (p+1)(1+s)]
  int p = static_cast<int>(std::ceil(gamma / (1.0 + se))) - 1;
  while (p > 0 && gamma <= p * (1.0 + se)) --p;
  while (gamma > (p + 1) * (1.0 + se)) ++p;
  r.period = p;

  const double base = p + p * se;
  double d = 0.0;
  if (se < 1.0) {
    if (gamma <= base + se) {
      d = -gamma + p;
      r.branch = 1;
    } else {
      d = -(p + 1) * se;
      r.branch = 2;
    }
  } else if (gamma <= base + 1.0) {
    d = -gamma + p;
    r.branch = 1;
  } else if (gamma <= base + 2.0 * se - 1.0) {
    d = -(gamma - p + p * se + 1.0) / 2.0;
    r.branch = 2;
  } else {
    d = -(p + 1) * se;
    r.branch = 3;
  }
  static constexpr const char* kBranch[] = {"", "i", "ii", "iii"};
  r.d_exponent = tidy(d);
  r.n_exponent = tidy(d / gamma);
  r.label = "p=" + std::to_string(p) + " branch " + kBranch[r.branch];
  if (s > 2.0) r.label += " (s>2 evaluated as s=2)";
  return r;
}

RateResult interpolation_exponent(double s, double gamma) {
  if (!(s >= 0.0)) throw InputError("interpolation_exponent: s must be >= 0");
  if (!(gamma > 0.0) || std::isinf(gamma)) throw InputError("interpolation_exponent: gamma must be > 0");
  RateResult r;
  r.regime = Regime::HighDimInterp;
  const double l = std::floor(gamma);
  r.period = static_cast<int>(l);
  const double d = std::max({l - gamma, gamma - l - 1.0, -(l + 1.0) * s});
  r.d_exponent = tidy(d);
  r.n_exponent = tidy(d / gamma);
  r.inconsistent = d == 0.0;
  r.label = "l=" + std::to_string(r.period) + (r.inconsistent ? " inconsistent" : "");
  return r;
}

}  // namespace lab::rates
