#include "lab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lab/error.hpp"

namespace lab::linalg {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tol, int max_sweeps) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw InputError("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double total = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > tol * total; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > tol * total * 10.0)
    throw NumericalError("jacobi_eigen: no convergence", off_norm() / std::max(total, 1e-300));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

int orthonormalize_columns(Eigen::MatrixXd& block, double drop) {
  int rank = 0;
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    const double original = block.col(j).norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < j; ++k)
        block.col(j) -= block.col(k).dot(block.col(j)) * block.col(k);
    const double norm = block.col(j).norm();
    if (original == 0.0 || norm <= drop * original) {
      block.col(j).setZero();
    } else {
      block.col(j) /= norm;
      ++rank;
    }
  }
  return rank;
}

void Tridiagonal::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

double Tridiagonal::gershgorin_bound() const {
  const std::size_t n = diag.size();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    bound = std::max(bound, r);
  }
  return bound;
}

namespace {

template <class T>
std::vector<T> gtsv(const Tridiagonal& tri, T a, T b, std::span<const T> rhs) {
  const std::size_t n = tri.size();
  if (rhs.size() != n) throw InputError("solve_shifted: dimension mismatch");
  std::vector<T> d(n), dl(n > 0 ? n - 1 : 0), du(n > 0 ? n - 1 : 0), x(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) d[i] = a * tri.diag[i] + b;
  for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = du[i] = a * tri.off[i];
  if (n == 0) return x;

  auto singular = [] { throw NumericalError("solve_shifted: singular tridiagonal system"); };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == T{}) singular();
      const T fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      x[i + 1] -= fact * x[i];
      dl[i] = T{};
    } else {
      const T fact = d[i] / dl[i];
      d[i] = dl[i];
      T temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -fact * dl[i];
      } else {
        dl[i] = T{};
      }
      du[i] = temp;
      temp = x[i];
      x[i] = x[i + 1];
      x[i + 1] = temp - fact * x[i + 1];
    }
  }
  if (d[n - 1] == T{}) singular();
  x[n - 1] /= d[n - 1];
  if (n > 1) x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;)
    x[k] = (x[k] - du[k] * x[k + 1] - dl[k] * x[k + 2]) / d[k];
  return x;
}

}  // namespace

std::vector<std::complex<double>> solve_shifted(const Tridiagonal& t, std::complex<double> a,
                                                std::complex<double> b,
                                                std::span<const std::complex<double>> rhs) {
  return gtsv<std::complex<double>>(t, a, b, rhs);
}

std::vector<double> solve_shifted(const Tridiagonal& t, double a, double b,
                                  std::span<const double> rhs) {
  return gtsv<double>(t, a, b, rhs);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw InputError("gauss_legendre: n must be positive");
  QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      // Derivative at the converged root.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace lab::linalg
