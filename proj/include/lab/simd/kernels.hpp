#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used across the library. Every entry has a scalar
// reference implementation; wider variants are selected once at startup from
// the CPU feature set and must agree with the reference up to summation order
// and last-ulp differences in exp.
//
// Set LAB_SIMD=scalar (or avx2) in the environment to force a table.
namespace lab::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* x, const double* y, std::size_t n);

  // y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // z += a x + b y
  void (*axpy2)(double a, const double* x, double b, const double* y, double* z, std::size_t n);

  // out[i] = min(x, xs[i]) - (bridge ? x * xs[i] : 0)
  void (*brownian_row)(double x, const double* xs, std::size_t n, bool bridge, double* out);

  // Three-term sine recurrence. With s_0 = before[i], s_1 = first[i] and
  // s_{k+1} = two_cos[i] s_k - s_{k-1}, writes out[k-1] = sum_i w[i] s_k(i)
  // for k = 1..count.
  void (*sine_project)(const double* two_cos, const double* before, const double* first,
                       const double* w, std::size_t n, std::size_t count, double* out);

  // bias = sum_j (exp(-lam_j t) theta_j)^2, variance = sum_j (1 - exp(-lam_j t))^2
  void (*filter_risk)(const double* lam, const double* theta, std::size_t n, double t,
                      double* bias, double* variance);

  // out[j] = (1 - exp(-lam_j t)) z_j
  void (*flow_filter)(const double* lam, const double* z, std::size_t n, double t, double* out);

  // out[i] = scale * max(x[i], 0)
  void (*relu_scaled)(const double* x, std::size_t n, double scale, double* out);
};

bool available(Isa isa) noexcept;

/// Table for a specific ISA; throws CapabilityError when the CPU lacks it.
const KernelTable& table(Isa isa);

/// Table chosen at first use (best available unless LAB_SIMD overrides).
const KernelTable& active();

namespace detail {
extern const KernelTable kScalarTable;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace lab::simd
