#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lab/fit.hpp"

// Gaussian sequence model z_j = theta_j + xi_j, xi_j ~ N(0, sigma0^2 / n),
// and the spectral gradient flow theta_{j,t} = (1 - exp(-lambda_j t)) z_j.
namespace lab::gsm {

struct GsmInstance {
  std::vector<double> theta;   // truth, length N
  std::vector<double> lambda;  // positive, non-increasing, length N
  double n = 1.0;              // effective sample size
  std::uint64_t seed = 0;
  double noise_var = 1.0;      // sigma0^2; 1 gives the textbook N(0, 1/n)
  double tail_bias = 0.0;      // sum_{j>N} theta_j^2 when known

  std::size_t size() const { return theta.size(); }
};

void validate(const GsmInstance& inst);

/// Z_j = theta_j + sqrt(noise_var / n) * normal(seed, kGsmNoise, j).
std::vector<double> sample(const GsmInstance& inst);

/// (1 - exp(-lambda_j t)) Z_j.
std::vector<double> vanilla_flow(std::span<const double> z, std::span<const double> lambda,
                                 double t);

/// Forward Euler on d theta_j / dt = lambda_j (z_j - theta_j) from 0,
/// with the final step shortened to land on t.
std::vector<double> euler_flow(std::span<const double> z, std::span<const double> lambda,
                               double t, double eta);

struct RiskParts {
  double bias = 0.0;       // sum_j (exp(-lambda_j t) theta_j)^2
  double variance = 0.0;   // (noise_var / n) sum_j (1 - exp(-lambda_j t))^2
  double tail_bias = 0.0;  // truth mass beyond the truncation

  double total() const { return bias + variance + tail_bias; }
};

RiskParts exact_risk(std::span<const double> theta, std::span<const double> lambda, double t,
                     double n, double noise_var = 1.0, double tail_bias = 0.0);

/// lambda_j = j^-beta and the boundary truth theta_j = j^-(s beta + 1)/2,
/// truncated at N with the truth tail from Euler-Maclaurin.
struct PowerFamily {
  double beta = 2.0;
  double s = 1.5;
  std::size_t N = 65536;

  std::vector<double> lambda() const;
  std::vector<double> theta() const;
  double tail_bias() const;
};

/// sum_{j>N} j^-p for p > 1 (Euler-Maclaurin through the third derivative).
double power_tail(double p, std::size_t N);

struct CurvePoint {
  double n;
  double t;
  RiskParts risk;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  fit::SlopeFit fit;
  double predicted_slope;  // -min(s theta, 1 - theta/beta); 0 when saturated
  bool saturated;
};

/// Exact risks at t = n^theta_exponent over n_grid (>= 4 points).
LearningCurve learning_curve(const PowerFamily& family, std::span<const double> n_grid,
                             double theta_exponent);

}  // namespace lab::gsm
