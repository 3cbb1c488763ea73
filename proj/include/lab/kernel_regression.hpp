#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lab/spectral.hpp"

// Kernel ridge regression, kernel gradient flow and kernel interpolation on
// [0,1]. All three estimators predict with f(x) = sum_i w_i k(x, x_i); they
// differ only in the dual weights w:
//
//   KRR(lambda)    w = (K + n lambda I)^-1 Y
//   KGF(t)         w = K^-1 (I - exp(-K t / n)) Y
//   Interpolation  w = K^-1 Y
namespace lab::kreg {

struct Dataset1D {
  std::vector<double> x;
  std::vector<double> y;
  double sigma0 = 0.0;

  std::size_t size() const { return x.size(); }
};

/// x_i ~ U(0,1), y_i = f(x_i) + sigma0 * N(0,1), keyed by `seed`.
Dataset1D make_dataset(const std::function<double(double)>& f, int n, double sigma0,
                       std::uint64_t seed);

struct Gram {
  Eigen::MatrixXd matrix;
  double min_eigenvalue;
};

Gram gram(const spectral::MercerKernel& k, std::span<const double> x);

/// Dense: symmetric factorization of the Gram matrix, O(n^3).
/// Tridiagonal: k1/k2 with distinct interior inputs have a tridiagonal
/// inverse Gram (Brownian bridge/motion are Markov), O(n) per solve.
/// Auto: tridiagonal when it applies and n > kAutoTridiagonalAbove.
enum class SolverPath { Auto, Dense, Tridiagonal };
inline constexpr std::size_t kAutoTridiagonalAbove = 512;

/// Factorizations whose reciprocal condition estimate falls below this
/// are rejected.
inline constexpr double kConditionLimit = 1e12;

enum class Kind { Krr, Kgf, Interpolation };

class KernelEstimator {
 public:
  KernelEstimator(Kind kind, double parameter, spectral::MercerKernel kernel,
                  std::vector<double> x, std::vector<double> weights, std::string diagnostic = {});

  Kind kind() const { return kind_; }
  /// lambda for KRR, t for KGF, 0 for interpolation.
  double parameter() const { return parameter_; }
  const spectral::MercerKernel& kernel() const { return kernel_; }
  const std::vector<double>& inputs() const { return x_; }
  const std::vector<double>& weights() const { return w_; }
  /// Non-empty when the fit took a fallback path.
  const std::string& diagnostic() const { return diagnostic_; }

  double predict(double x) const;
  std::vector<double> predict(std::span<const double> x) const;

 private:
  Kind kind_;
  double parameter_;
  spectral::MercerKernel kernel_;
  std::vector<double> x_, w_;
  std::string diagnostic_;
};

KernelEstimator krr_fit(const spectral::MercerKernel& k, const Dataset1D& data, double lambda,
                        SolverPath path = SolverPath::Auto);

enum class KgfMode { ClosedForm, Euler };

/// `eta` is the Euler step (ignored in closed form); it must satisfy
/// eta * lambda_max(K) / n <= 1. The last step is shortened to land on t.
KernelEstimator kgf_predict(const spectral::MercerKernel& k, const Dataset1D& data, double t,
                            KgfMode mode = KgfMode::ClosedForm, double eta = 0.0,
                            SolverPath path = SolverPath::Auto);

KernelEstimator interpolate(const spectral::MercerKernel& k, const Dataset1D& data,
                            SolverPath path = SolverPath::Auto);

struct MonteCarlo {
  int samples = 20000;
  std::uint64_t seed = 0;
};
struct Basis {
  int J = 4096;
};
using RiskMethod = std::variant<MonteCarlo, Basis>;

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for basis mode
};

/// L2(U[0,1]) distance to the truth. Basis mode computes
///   sum_{j<=J} (that_j - theta_j)^2 + (|f|^2 - sum_{j<=J} that_j^2) + truth.tail
/// with |f|^2 in closed form, so the only truncation error is the cross
/// term beyond J. Monte-Carlo mode evaluates the truth by its expansion.
RiskEstimate risk(const KernelEstimator& est, const spectral::CoefficientVector& truth,
                  const RiskMethod& method);

/// Monte-Carlo risk against an explicit truth function.
RiskEstimate risk(const KernelEstimator& est, const std::function<double(double)>& truth,
                  MonteCarlo method);

/// Coefficients that_j = lambda_j sum_i w_i psi_j(x_i) of the estimator in
/// its kernel's eigenbasis, j = 1..J.
std::vector<double> estimator_coefficients(const KernelEstimator& est, int J);

/// int_0^1 f(x)^2 dx in closed form for k1/k2 estimators.
double estimator_norm_sq(const KernelEstimator& est);

struct NtkComplexity {
  double value;          // sqrt(Y^T K^-1 Y / n)
  double quadratic;      // Y^T K^-1 Y by direct solve
  double spectral_form;  // sum_j (v_j^T Y)^2 / lambda_j
};

NtkComplexity ntk_complexity(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y);

}  // namespace lab::kreg
