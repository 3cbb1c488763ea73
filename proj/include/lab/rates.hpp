#pragma once

#include <optional>
#include <string>

// Closed-form convergence exponents. Exponents are negative powers: a
// returned n_exponent of -0.75 means risk ~ n^-0.75. Log factors are dropped.
namespace lab::rates {

enum class Regime { FixedDim, HighDimKrr, HighDimInterp };
enum class Estimator { Kgf, Krr };

struct RateResult {
  Regime regime = Regime::FixedDim;
  double n_exponent = 0.0;
  std::optional<double> d_exponent;  // high-dimensional regimes only
  bool saturated = false;            // risk does not vanish (fixed-d, theta >= beta)
  bool inconsistent = false;         // interpolation exponent is 0
  int period = -1;                   // p (high-d KRR) or l = floor(gamma) (interpolation)
  int branch = 0;                    // 1, 2, 3 within the period (high-d KRR)
  std::string label;
};

/// Learning-curve exponent of gradient flow stopped at t = n^theta:
/// -min(s theta, 1 - theta/beta), saturated when theta >= beta. With
/// Estimator::Krr (t read as 1/lambda) the source condition is capped at 2.
RateResult kgf_curve_exponent(double s, double beta, double theta,
                              Estimator est = Estimator::Kgf);

struct Minimax {
  double exponent;    // s beta / (s beta + 1), reported as a positive rate
  double theta_star;  // beta / (s beta + 1)
};

/// s may be +infinity (exponent 1, theta* 0).
Minimax minimax_exponent(double s, double beta, Estimator est = Estimator::Kgf);

/// Optimally tuned KRR with n ~ d^gamma. s > 2 evaluates the s = 2 formulas.
RateResult highdim_krr_exponents(double s, double gamma);

/// Kernel interpolation with n ~ d^gamma: max(l - gamma, gamma - l - 1, -(l+1)s).
RateResult interpolation_exponent(double s, double gamma);

}  // namespace lab::rates
