#pragma once

#include <complex>
#include <span>
#include <vector>

#include "lab/linalg.hpp"
#include "lab/spectral.hpp"

// O(n) dual-weight solvers for the Brownian bridge (k1) and Brownian motion
// (k2) kernels. For sorted distinct points 0 < x_1 < ... < x_n < 1 with
// gaps h_1 = x_1, h_i = x_i - x_{i-1} (and h_{n+1} = 1 - x_n for the
// bridge), the inverse Gram matrix T is tridiagonal:
//
//   T_ii = 1/h_i + 1/h_{i+1}   (T_nn = 1/h_n for Brownian motion)
//   T_i,i+1 = -1/h_{i+1}
namespace lab::kreg::markov {

bool applicable(const spectral::MercerKernel& k, std::span<const double> x);

struct SortedProblem {
  std::vector<std::size_t> order;  // xs[i] = x[order[i]]
  std::vector<double> xs;
  linalg::Tridiagonal precision;
};

/// Throws InputError when `applicable` is false.
SortedProblem prepare(const spectral::MercerKernel& k, std::span<const double> x);

/// Upper bound on cond(K) from trace(K) and a Gershgorin bound on T.
double condition_bound(const spectral::MercerKernel& k, const SortedProblem& p);

// Weights are returned in the caller's original input order.
std::vector<double> interpolation_weights(const SortedProblem& p, std::span<const double> y);
std::vector<double> ridge_weights(const SortedProblem& p, std::span<const double> y, double mu);
std::vector<double> flow_weights(const SortedProblem& p, std::span<const double> y, double tau);

/// Rational approximation exp(s) ~ 2 Re sum_k c_k / (z_k - s) for s <= 0 on
/// a parabolic Hankel contour with `nodes` trapezoid points (only the upper
/// half is stored; the lower half is the complex conjugate).
struct ContourRule {
  std::vector<std::complex<double>> z;
  std::vector<std::complex<double>> c;
};

ContourRule exp_contour(int nodes = 32);
double contour_exp(const ContourRule& rule, double s);

}  // namespace lab::kreg::markov
