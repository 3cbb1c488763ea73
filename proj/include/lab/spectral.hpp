#pragma once

#include <functional>
#include <span>
#include <vector>

// Mercer kernels on [0,1] with closed-form eigensystems.
//
//   BrownianBridge  k(x,y) = min(x,y) - xy   lambda_j = 1/(pi j)^2,
//                                            psi_j = sqrt2 sin(j pi x)
//   Min             k(x,y) = min(x,y)        lambda_j = 4/(pi (2j-1))^2,
//                                            psi_j = sqrt2 sin((2j-1) pi x / 2)
//   SyntheticPowerLaw                        lambda_j = scale j^-beta, no functions
//
// Indices j are 1-based in the math and 0-based in every container.
namespace lab::spectral {

enum class KernelKind { BrownianBridge, Min, SyntheticPowerLaw };

struct MercerKernel {
  KernelKind kind = KernelKind::BrownianBridge;
  double beta = 2.0;   // SyntheticPowerLaw only
  double scale = 1.0;  // SyntheticPowerLaw only

  static MercerKernel brownian_bridge() { return {KernelKind::BrownianBridge}; }
  static MercerKernel min() { return {KernelKind::Min}; }
  static MercerKernel power_law(double beta, double scale = 1.0);

  bool has_closed_form() const { return kind != KernelKind::SyntheticPowerLaw; }
  double operator()(double x, double y) const;
};

/// Closed-form evaluation; throws InputError outside [0,1] and
/// CapabilityError for spectrum-only kernels.
double kernel_eval(const MercerKernel& k, double x, double y);

class EigenSequence {
 public:
  EigenSequence(MercerKernel kernel, std::vector<double> eigenvalues);

  const MercerKernel& kernel() const { return kernel_; }
  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& eigenvalues() const { return values_; }
  double eigenvalue(int j) const { return values_.at(static_cast<std::size_t>(j - 1)); }

  bool has_functions() const { return kernel_.has_closed_form(); }
  /// psi_j(x) = sqrt2 sin(frequency(j) x)
  double frequency(int j) const;
  double eigenfunction(int j, double x) const;

 private:
  MercerKernel kernel_;
  std::vector<double> values_;
};

EigenSequence eigensystem(const MercerKernel& k, int J);

/// Expansion coefficients in an eigenbasis. `tail` is the squared L2 mass of
/// the function beyond the stored truncation when it is known (0 otherwise).
struct CoefficientVector {
  std::vector<double> theta;
  EigenSequence basis;
  double tail = 0.0;

  int size() const { return static_cast<int>(theta.size()); }
  /// Squared L2 norm: stored coefficients plus tail.
  double norm_sq() const;
};

/// theta_j = int_0^1 f psi_j for j = 1..J by composite Gauss-Legendre with
/// dyadic panel refinement. Also fills `tail` from a quadrature of f^2.
CoefficientVector project(const std::function<double(double)>& f, const EigenSequence& basis,
                          int J, double tol = 1e-12);

/// sum_j theta_j psi_j(x) over the stored truncation.
double expand(const CoefficientVector& c, double x);

struct PowerNorm {
  double value = 0.0;
  bool diverging = false;
};

/// (sum_j lambda_j^-s theta_j^2)^(1/2) with a doubling-window divergence flag.
PowerNorm power_norm(const CoefficientVector& c, double s);

/// Weighted sums sum_i w_i psi_j(x_i) for j = 1..J using the sine recurrence.
std::vector<double> eigenfunction_sums(const EigenSequence& basis, std::span<const double> x,
                                       std::span<const double> w, int J);

}  // namespace lab::spectral
