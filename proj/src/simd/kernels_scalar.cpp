#include <algorithm>
#include <cmath>
#include <vector>

#include "lab/simd/kernels.hpp"

namespace lab::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy2(double a, const double* x, double b, const double* y, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] += a * x[i] + b * y[i];
}

void brownian_row(double x, const double* xs, std::size_t n, bool bridge, double* out) {
  const double c = bridge ? x : 0.0;
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(x, xs[i]) - c * xs[i];
}

void sine_project(const double* two_cos, const double* before, const double* first,
                  const double* w, std::size_t n, std::size_t count, double* out) {
  std::vector<double> prev(before, before + n), cur(first, first + n);
  for (std::size_t k = 0; k < count; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i] * cur[i];
      const double next = two_cos[i] * cur[i] - prev[i];
      prev[i] = cur[i];
      cur[i] = next;
    }
    out[k] = acc;
  }
}

void filter_risk(const double* lam, const double* theta, std::size_t n, double t, double* bias,
                 double* variance) {
  double b = 0.0, v = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = std::exp(-lam[j] * t);
    const double r = e * theta[j];
    b += r * r;
    v += (1.0 - e) * (1.0 - e);
  }
  *bias = b;
  *variance = v;
}

void flow_filter(const double* lam, const double* z, std::size_t n, double t, double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = (1.0 - std::exp(-lam[j] * t)) * z[j];
}

void relu_scaled(const double* x, std::size_t n, double scale, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? scale * x[i] : 0.0;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{"scalar", dot,         axpy,        axpy2,      brownian_row,
                               sine_project, filter_risk, flow_filter, relu_scaled};
}  // namespace detail

}  // namespace lab::simd
