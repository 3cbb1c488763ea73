#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

// Small self-contained numerical building blocks shared by the modules.
namespace lab::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match `values`
};

/// Cyclic Jacobi eigensolver for small dense symmetric matrices. Sweeps until
/// the off-diagonal Frobenius mass falls below tol times the total mass.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tol = 1e-15,
                            int max_sweeps = 100);

/// Modified Gram-Schmidt applied twice; columns that collapse below `drop`
/// relative norm are replaced by zero vectors. Returns the numerical rank.
int orthonormalize_columns(Eigen::MatrixXd& block, double drop = 1e-13);

/// Symmetric tridiagonal matrix: `diag` has n entries, `off` has n-1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
  /// y = T x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// Upper bound on the spectral radius (Gershgorin).
  double gershgorin_bound() const;
};

/// Solves (a T + b I) x = rhs with Gaussian elimination and partial pivoting
/// (the scheme of LAPACK gtsv). Works for complex shifts.
std::vector<std::complex<double>> solve_shifted(const Tridiagonal& t, std::complex<double> a,
                                                std::complex<double> b,
                                                std::span<const std::complex<double>> rhs);
std::vector<double> solve_shifted(const Tridiagonal& t, double a, double b,
                                  std::span<const double> rhs);

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

}  // namespace lab::linalg
