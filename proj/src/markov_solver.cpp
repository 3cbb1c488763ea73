#include "lab/markov_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lab/error.hpp"

namespace lab::kreg::markov {

using spectral::KernelKind;

bool applicable(const spectral::MercerKernel& k, std::span<const double> x) {
  if (k.kind != KernelKind::BrownianBridge && k.kind != KernelKind::Min) return false;
  if (x.empty()) return false;
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  if (!(xs.front() > 0.0) || !(xs.back() < 1.0)) return false;
  return std::adjacent_find(xs.begin(), xs.end()) == xs.end();
}

SortedProblem prepare(const spectral::MercerKernel& k, std::span<const double> x) {
  if (!applicable(k, x))
    throw InputError("markov solver: needs k1/k2 and distinct inputs inside (0,1)");
  const std::size_t n = x.size();
  SortedProblem p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  std::stable_sort(p.order.begin(), p.order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  p.xs.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.xs[i] = x[p.order[i]];

  std::vector<double> inv_gap(n + 1);
  inv_gap[0] = 1.0 / p.xs[0];
  for (std::size_t i = 1; i < n; ++i) inv_gap[i] = 1.0 / (p.xs[i] - p.xs[i - 1]);
  inv_gap[n] = k.kind == KernelKind::BrownianBridge ? 1.0 / (1.0 - p.xs[n - 1]) : 0.0;

  p.precision.diag.resize(n);
  p.precision.off.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) p.precision.diag[i] = inv_gap[i] + inv_gap[i + 1];
  for (std::size_t i = 0; i + 1 < n; ++i) p.precision.off[i] = -inv_gap[i + 1];
  return p;
}

double condition_bound(const spectral::MercerKernel& k, const SortedProblem& p) {
  double trace = 0.0;
  for (double v : p.xs) trace += k.kind == KernelKind::BrownianBridge ? v * (1.0 - v) : v;
  return trace * p.precision.gershgorin_bound();
}

namespace {

std::vector<double> sorted_copy(const SortedProblem& p, std::span<const double> y) {
  if (y.size() != p.xs.size()) throw InputError("markov solver: label count mismatch");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[p.order[i]];
  return out;
}

std::vector<double> unsort(const SortedProblem& p, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[p.order[i]] = v[i];
  return out;
}

std::vector<double> apply_precision(const SortedProblem& p, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  p.precision.multiply(v, out);
  return out;
}

}  // namespace

std::vector<double> interpolation_weights(const SortedProblem& p, std::span<const double> y) {
  return unsort(p, apply_precision(p, sorted_copy(p, y)));
}

std::vector<double> ridge_weights(const SortedProblem& p, std::span<const double> y, double mu) {
  // K + mu I = K (I + mu T)
  const std::vector<double> ty = apply_precision(p, sorted_copy(p, y));
  return unsort(p, linalg::solve_shifted(p.precision, mu, 1.0, ty));
}

std::vector<double> flow_weights(const SortedProblem& p, std::span<const double> y, double tau) {
  // exp(-tau K) y ~ 2 Re sum_k c_k (z_k I + tau K)^-1 y
  //              = 2 Re sum_k c_k (z_k T + tau I)^-1 T y
  static const ContourRule rule = exp_contour();
  const std::vector<double> ys = sorted_copy(p, y);
  const std::vector<double> ty = apply_precision(p, ys);
  const std::vector<std::complex<double>> rhs(ty.begin(), ty.end());
  std::vector<double> residual = ys;
  for (std::size_t k = 0; k < rule.z.size(); ++k) {
    const auto part = linalg::solve_shifted(p.precision, rule.z[k], {tau, 0.0}, rhs);
    for (std::size_t i = 0; i < part.size(); ++i) residual[i] -= 2.0 * (rule.c[k] * part[i]).real();
  }
  return unsort(p, apply_precision(p, residual));
}

ContourRule exp_contour(int nodes) {
  if (nodes < 2 || nodes % 2 != 0) throw InputError("exp_contour: node count must be even");
  constexpr double pi = std::numbers::pi;
  const double h = 2.0 * pi / nodes;
  const double N = nodes;
  ContourRule rule;
  for (int k = nodes / 2; k < nodes; ++k) {
    const double th = -pi + (k + 0.5) * h;
    const std::complex<double> z(N * (0.1309 - 0.1194 * th * th), N * 0.25 * th);
    const std::complex<double> dz(-N * 0.2388 * th, N * 0.25);
    rule.z.push_back(z);
    rule.c.push_back(std::complex<double>(0.0, -1.0 / N) * std::exp(z) * dz);
  }
  return rule;
}

double contour_exp(const ContourRule& rule, double s) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < rule.z.size(); ++k) acc += rule.c[k] / (rule.z[k] - s);
  return 2.0 * acc.real();
}

}  // namespace lab::kreg::markov
