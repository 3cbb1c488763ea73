#include "lab/gsm.hpp"

#include <algorithm>
#include <cmath>

#include "lab/error.hpp"
#include "lab/random.hpp"
#include "lab/rates.hpp"
#include "lab/simd/kernels.hpp"

namespace lab::gsm {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw InputError(std::string(what) + ": length mismatch");
}

}  // namespace

void validate(const GsmInstance& inst) {
  if (inst.theta.empty()) throw InputError("gsm: N must be >= 1");
  check_pair(inst.theta, inst.lambda, "gsm");
  if (!(inst.n >= 1.0)) throw InputError("gsm: n must be >= 1");
  if (!(inst.noise_var >= 0.0)) throw InputError("gsm: noise variance must be >= 0");
  for (double l : inst.lambda)
    if (!(l > 0.0)) throw InputError("gsm: eigenvalues must be positive");
}

std::vector<double> sample(const GsmInstance& inst) {
  validate(inst);
  const double sd = std::sqrt(inst.noise_var / inst.n);
  std::vector<double> z(inst.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] = inst.theta[j] + sd * rng::normal(inst.seed, rng::kGsmNoise, j);
  return z;
}

std::vector<double> vanilla_flow(std::span<const double> z, std::span<const double> lambda,
                                 double t) {
  check_pair(z, lambda, "vanilla_flow");
  if (!(t >= 0.0)) throw InputError("vanilla_flow: t must be >= 0");
  std::vector<double> out(z.size());
  if (std::isinf(t)) {
    std::copy(z.begin(), z.end(), out.begin());
    return out;
  }
  simd::active().flow_filter(lambda.data(), z.data(), z.size(), t, out.data());
  return out;
}

std::vector<double> euler_flow(std::span<const double> z, std::span<const double> lambda,
                               double t, double eta) {
  check_pair(z, lambda, "euler_flow");
  if (!(t >= 0.0) || std::isinf(t)) throw InputError("euler_flow: t must be finite and >= 0");
  if (!(eta > 0.0)) throw InputError("euler_flow: eta must be > 0");
  std::vector<double> th(z.size(), 0.0);
  const long steps = static_cast<long>(std::ceil(t / eta - 1e-9));
  double elapsed = 0.0;
  for (long s = 0; s < steps; ++s) {
    const double h = std::min(eta, t - elapsed);
    for (std::size_t j = 0; j < th.size(); ++j) th[j] += h * lambda[j] * (z[j] - th[j]);
    elapsed += h;
  }
  return th;
}

RiskParts exact_risk(std::span<const double> theta, std::span<const double> lambda, double t,
                     double n, double noise_var, double tail_bias) {
  check_pair(theta, lambda, "exact_risk");
  if (!(t >= 0.0)) throw InputError("exact_risk: t must be >= 0");
  if (!(n > 0.0)) throw InputError("exact_risk: n must be > 0");
  RiskParts r;
  r.tail_bias = tail_bias;
  if (std::isinf(t)) {
    r.variance = noise_var / n * static_cast<double>(theta.size());
    return r;
  }
  double v = 0.0;
  simd::active().filter_risk(lambda.data(), theta.data(), theta.size(), t, &r.bias, &v);
  r.variance = noise_var / n * v;
  return r;
}

std::vector<double> PowerFamily::lambda() const {
  std::vector<double> l(N);
  for (std::size_t j = 0; j < N; ++j) l[j] = std::pow(static_cast<double>(j + 1), -beta);
  return l;
}

std::vector<double> PowerFamily::theta() const {
  const double e = -(s * beta + 1.0) / 2.0;
  std::vector<double> th(N);
  for (std::size_t j = 0; j < N; ++j) th[j] = std::pow(static_cast<double>(j + 1), e);
  return th;
}

double PowerFamily::tail_bias() const { return power_tail(s * beta + 1.0, N); }

double power_tail(double p, std::size_t N) {
  if (!(p > 1.0)) throw InputError("power_tail: exponent must be > 1");
  if (N == 0) throw InputError("power_tail: N must be >= 1");
  // sum_{j>N} f(j) = int_N^inf f - f(N)/2 - f'(N)/12 + f'''(N)/720 - ...
  const double x = static_cast<double>(N);
  const double f = std::pow(x, -p);
  return x * f / (p - 1.0) - 0.5 * f + p * f / (12.0 * x) -
         p * (p + 1.0) * (p + 2.0) * f / (720.0 * x * x * x);
}

LearningCurve learning_curve(const PowerFamily& family, std::span<const double> n_grid,
                             double theta_exponent) {
  if (n_grid.size() < 4) throw InputError("learning_curve: need at least 4 grid points");
  if (!(theta_exponent > 0.0)) throw InputError("learning_curve: theta exponent must be > 0");
  const auto lam = family.lambda();
  const auto th = family.theta();
  const double tail = family.tail_bias();
  LearningCurve lc;
  std::vector<double> ns, rs;
  for (double n : n_grid) {
    if (!(n >= 1.0)) throw InputError("learning_curve: n must be >= 1");
    const double t = std::pow(n, theta_exponent);
    CurvePoint p{n, t, exact_risk(th, lam, t, n, 1.0, tail)};
    ns.push_back(n);
    rs.push_back(p.risk.total());
    lc.points.push_back(p);
  }
  lc.fit = fit::fit_slope(ns, rs);
  const auto pred = rates::kgf_curve_exponent(family.s, family.beta, theta_exponent);
  lc.saturated = pred.saturated;
  lc.predicted_slope = pred.n_exponent;
  return lc;
}

}  // namespace lab::gsm
