#include "lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lab/error.hpp"
#include "lab/linalg.hpp"
#include "lab/simd/kernels.hpp"

namespace lab::spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr int kRuleOrder = 20;
constexpr int kMaxDoublings = 12;
// Re-seed the sine recurrence from std::sin this often; error growth of the
// three-term recurrence near x = 0 and x = 1 is quadratic in the step count.
constexpr int kReseedEvery = 256;

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw InputError(std::string(what) + ": argument outside [0,1]");
}

// omega_j = offset + (j-1) pi.
double first_frequency(KernelKind kind) { return kind == KernelKind::Min ? 0.5 * kPi : kPi; }

}  // namespace

MercerKernel MercerKernel::power_law(double beta, double scale) {
  if (!(beta > 0.0) || !(scale > 0.0))
    throw InputError("power_law: beta and scale must be positive");
  return {KernelKind::SyntheticPowerLaw, beta, scale};
}

double MercerKernel::operator()(double x, double y) const { return kernel_eval(*this, x, y); }

double kernel_eval(const MercerKernel& k, double x, double y) {
  check_unit(x, "kernel_eval");
  check_unit(y, "kernel_eval");
  switch (k.kind) {
    case KernelKind::BrownianBridge:
      return std::min(x, y) - x * y;
    case KernelKind::Min:
      return std::min(x, y);
    case KernelKind::SyntheticPowerLaw:
      break;
  }
  throw CapabilityError("kernel_eval: synthetic power-law kernel has no closed form");
}

EigenSequence::EigenSequence(MercerKernel kernel, std::vector<double> eigenvalues)
    : kernel_(kernel), values_(std::move(eigenvalues)) {
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(values_[j] > 0.0)) throw InputError("EigenSequence: eigenvalues must be positive");
    if (j > 0 && values_[j] > values_[j - 1])
      throw InputError("EigenSequence: eigenvalues must be non-increasing");
  }
}

double EigenSequence::frequency(int j) const {
  if (!has_functions()) throw CapabilityError("eigenfunction: spectrum-only kernel");
  return first_frequency(kernel_.kind) + (j - 1) * kPi;
}

double EigenSequence::eigenfunction(int j, double x) const {
  return kSqrt2 * std::sin(frequency(j) * x);
}

EigenSequence eigensystem(const MercerKernel& k, int J) {
  if (J < 1) throw InputError("eigensystem: J must be positive");
  std::vector<double> lam(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    double v = 0.0;
    switch (k.kind) {
      case KernelKind::BrownianBridge:
        v = 1.0 / (kPi * kPi * j * j);
        break;
      case KernelKind::Min: {
        const double w = (2.0 * j - 1.0) * kPi;
        v = 4.0 / (w * w);
        break;
      }
      case KernelKind::SyntheticPowerLaw:
        v = k.scale * std::pow(static_cast<double>(j), -k.beta);
        break;
    }
    lam[static_cast<std::size_t>(j - 1)] = v;
  }
  return EigenSequence(k, std::move(lam));
}

double CoefficientVector::norm_sq() const {
  double s = tail;
  for (double t : theta) s += t * t;
  return s;
}

std::vector<double> eigenfunction_sums(const EigenSequence& basis, std::span<const double> x,
                                       std::span<const double> w, int J) {
  if (x.size() != w.size()) throw InputError("eigenfunction_sums: size mismatch");
  if (J < 1) throw InputError("eigenfunction_sums: J must be positive");
  const double w1 = basis.frequency(1);
  const std::size_t n = x.size();
  std::vector<double> two_cos(n), before(n), first(n), ws(n);
  for (std::size_t i = 0; i < n; ++i) {
    two_cos[i] = 2.0 * std::cos(kPi * x[i]);
    ws[i] = kSqrt2 * w[i];
  }
  const auto& kt = simd::active();
  std::vector<double> out(static_cast<std::size_t>(J));
  for (int start = 1; start <= J; start += kReseedEvery) {
    const int count = std::min(kReseedEvery, J - start + 1);
    const double omega = w1 + (start - 1) * kPi;
    for (std::size_t i = 0; i < n; ++i) {
      before[i] = std::sin((omega - kPi) * x[i]);
      first[i] = std::sin(omega * x[i]);
    }
    kt.sine_project(two_cos.data(), before.data(), first.data(), ws.data(), n,
                    static_cast<std::size_t>(count), out.data() + (start - 1));
  }
  return out;
}

CoefficientVector project(const std::function<double(double)>& f, const EigenSequence& basis,
                          int J, double tol) {
  if (!basis.has_functions()) throw CapabilityError("project: basis has no eigenfunctions");
  if (J < 1 || J > basis.size()) throw InputError("project: J outside the basis truncation");

  const linalg::QuadratureRule rule = linalg::gauss_legendre(kRuleOrder);
  auto estimate = [&](int panels, double& norm_sq) {
    const std::size_t m = static_cast<std::size_t>(panels) * kRuleOrder;
    std::vector<double> xs(m), ws(m);
    const double h = 1.0 / panels;
    norm_sq = 0.0;
    for (int p = 0; p < panels; ++p) {
      for (int q = 0; q < kRuleOrder; ++q) {
        const std::size_t i = static_cast<std::size_t>(p) * kRuleOrder + q;
        xs[i] = h * (p + 0.5 * (rule.nodes[q] + 1.0));
        const double fx = f(xs[i]);
        ws[i] = 0.5 * h * rule.weights[q] * fx;
        norm_sq += 0.5 * h * rule.weights[q] * fx * fx;
      }
    }
    return eigenfunction_sums(basis, xs, ws, J);
  };

  int panels = 2;
  while (panels * 4.0 < basis.frequency(J)) panels *= 2;
  double norm_prev = 0.0, norm_cur = 0.0;
  std::vector<double> prev = estimate(panels, norm_prev);
  double change = 0.0;
  for (int level = 0; level < kMaxDoublings; ++level) {
    panels *= 2;
    std::vector<double> cur = estimate(panels, norm_cur);
    change = std::abs(norm_cur - norm_prev);
    for (std::size_t j = 0; j < cur.size(); ++j)
      change = std::max(change, std::abs(cur[j] - prev[j]));
    if (!std::isfinite(change)) throw NumericalError("project: non-finite integrand");
    if (change <= tol) {
      CoefficientVector out{std::move(cur), basis, 0.0};
      double captured = 0.0;
      for (double t : out.theta) captured += t * t;
      out.tail = std::max(0.0, norm_cur - captured);
      return out;
    }
    prev = std::move(cur);
    norm_prev = norm_cur;
  }
  throw NumericalError("project: quadrature did not converge", change);
}

double expand(const CoefficientVector& c, double x) {
  check_unit(x, "expand");
  if (c.theta.empty()) return 0.0;
  const double one = 1.0;
  const std::vector<double> psi = eigenfunction_sums(c.basis, std::span<const double>(&x, 1),
                                                     std::span<const double>(&one, 1), c.size());
  double s = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) s += c.theta[j] * psi[j];
  return s;
}

PowerNorm power_norm(const CoefficientVector& c, double s) {
  if (!(s >= 0.0) || std::isinf(s)) throw InputError("power_norm: s must be finite and >= 0");
  const auto& lam = c.basis.eigenvalues();
  if (c.theta.size() > lam.size()) throw InputError("power_norm: basis shorter than coefficients");
  std::vector<double> windows;
  double total = 0.0;
  std::size_t lo = 1;
  for (std::size_t hi = 2; lo <= c.theta.size(); hi *= 2) {
    double w = 0.0;
    for (std::size_t j = lo; j < hi && j <= c.theta.size(); ++j)
      w += c.theta[j - 1] * c.theta[j - 1] * std::pow(lam[j - 1], -s);
    if (hi - 1 <= c.theta.size()) windows.push_back(w);
    total += w;
    lo = hi;
  }
  PowerNorm out{std::sqrt(total), false};
  if (windows.size() >= 2) {
    const double last = windows.back(), previous = windows[windows.size() - 2];
    out.diverging = last > 0.0 && previous < 1.05 * last;
  }
  return out;
}

}  // namespace lab::spectral
