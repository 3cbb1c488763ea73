#include "lab/simd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define LAB_HAVE_AVX2_TABLE 1
#include <immintrin.h>

#include <cmath>
#include <vector>
#endif

namespace lab::simd::detail {

#if LAB_HAVE_AVX2_TABLE

#define LAB_AVX2 __attribute__((target("avx2,fma")))

namespace {

LAB_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 709. Range reduction x = k ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation ~4e-18 relative). Results below
// the normal range are flushed to zero.
LAB_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0,
                                 1.0 / 3628800.0,    1.0 / 362880.0,    1.0 / 40320.0,
                                 1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,
                                 1.0 / 24.0,         1.0 / 6.0,         0.5,
                                 1.0,                1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(k32), _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

LAB_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

LAB_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

LAB_AVX2 void axpy2(double a, const double* x, double b, const double* y, double* z,
                    std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i));
    acc = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), acc);
    _mm256_storeu_pd(z + i, acc);
  }
  for (; i < n; ++i) z[i] += a * x[i] + b * y[i];
}

LAB_AVX2 void brownian_row(double x, const double* xs, std::size_t n, bool bridge, double* out) {
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d vc = _mm256_set1_pd(bridge ? x : 0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(xs + i);
    _mm256_storeu_pd(out + i, _mm256_fnmadd_pd(vc, xi, _mm256_min_pd(vx, xi)));
  }
  const double c = bridge ? x : 0.0;
  for (; i < n; ++i) out[i] = (x < xs[i] ? x : xs[i]) - c * xs[i];
}

LAB_AVX2 void sine_project(const double* two_cos, const double* before, const double* first,
                           const double* w, std::size_t n, std::size_t count, double* out) {
  std::vector<double> prev(before, before + n), cur(first, first + n);
  const std::size_t nv = n - n % 4;
  for (std::size_t k = 0; k < count; ++k) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
      const __m256d c = _mm256_loadu_pd(cur.data() + i);
      const __m256d p = _mm256_loadu_pd(prev.data() + i);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), c, acc);
      _mm256_storeu_pd(prev.data() + i, c);
      _mm256_storeu_pd(cur.data() + i, _mm256_fmsub_pd(_mm256_loadu_pd(two_cos + i), c, p));
    }
    double s = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
      s += w[i] * cur[i];
      const double next = two_cos[i] * cur[i] - prev[i];
      prev[i] = cur[i];
      cur[i] = next;
    }
    out[k] = s;
  }
}

LAB_AVX2 void filter_risk(const double* lam, const double* theta, std::size_t n, double t,
                          double* bias, double* variance) {
  const __m256d vt = _mm256_set1_pd(-t);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d b = _mm256_setzero_pd(), v = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_loadu_pd(lam + j), vt));
    const __m256d r = _mm256_mul_pd(e, _mm256_loadu_pd(theta + j));
    const __m256d q = _mm256_sub_pd(one, e);
    b = _mm256_fmadd_pd(r, r, b);
    v = _mm256_fmadd_pd(q, q, v);
  }
  double bs = hsum(b), vs = hsum(v);
  for (; j < n; ++j) {
    const double e = std::exp(-lam[j] * t);
    bs += (e * theta[j]) * (e * theta[j]);
    vs += (1.0 - e) * (1.0 - e);
  }
  *bias = bs;
  *variance = vs;
}

LAB_AVX2 void flow_filter(const double* lam, const double* z, std::size_t n, double t,
                          double* out) {
  const __m256d vt = _mm256_set1_pd(-t);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_loadu_pd(lam + j), vt));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_sub_pd(one, e), _mm256_loadu_pd(z + j)));
  }
  for (; j < n; ++j) out[j] = (1.0 - std::exp(-lam[j] * t)) * z[j];
}

LAB_AVX2 void relu_scaled(const double* x, std::size_t n, double scale, double* out) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_max_pd(_mm256_loadu_pd(x + i), zero)));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? scale * x[i] : 0.0;
}

const KernelTable kAvx2Table{"avx2",       dot,         axpy,        axpy2,      brownian_row,
                             sine_project, filter_risk, flow_filter, relu_scaled};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2Table; }

#else

const KernelTable* avx2_table() noexcept { return nullptr; }

#endif

}  // namespace lab::simd::detail
