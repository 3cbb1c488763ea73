#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/random.hpp"
#include "lab/simd/kernels.hpp"

using namespace lab;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t stream) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng::normal(99, stream, i);
  return v;
}

std::vector<double> rand01(std::size_t n, std::uint64_t stream) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng::uniform(99, stream, i);
  return v;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

const std::size_t kSizes[] = {0, 1, 3, 4, 7, 16, 65, 1001};

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar table is always available and active() resolves") {
  CHECK(simd::available(simd::Isa::Scalar));
  CHECK(simd::table(simd::Isa::Scalar).name == "scalar");
  CHECK_FALSE(simd::active().name.empty());
}

TEST_CASE("scalar reference matches textbook loops") {
  const auto& s = simd::table(simd::Isa::Scalar);
  const auto x = randn(37, 1), y = randn(37, 2);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] * y[i];
  CHECK(s.dot(x.data(), y.data(), x.size()) == doctest::Approx(d).epsilon(1e-14));

  const auto xs = rand01(37, 3);
  std::vector<double> row(xs.size());
  s.brownian_row(0.4, xs.data(), xs.size(), true, row.data());
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(row[i] == doctest::Approx(std::min(0.4, xs[i]) - 0.4 * xs[i]));

  // sine recurrence against direct evaluation
  const std::vector<double> pts = rand01(9, 4), w = randn(9, 5);
  std::vector<double> two_cos(9), before(9, 0.0), first(9);
  for (std::size_t i = 0; i < 9; ++i) {
    two_cos[i] = 2.0 * std::cos(M_PI * pts[i]);
    first[i] = std::sin(M_PI * pts[i]);
  }
  std::vector<double> out(50);
  s.sine_project(two_cos.data(), before.data(), first.data(), w.data(), 9, 50, out.data());
  for (int k = 1; k <= 50; ++k) {
    double ref = 0.0;
    for (std::size_t i = 0; i < 9; ++i) ref += w[i] * std::sin(k * M_PI * pts[i]);
    CHECK(out[k - 1] == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("every available table matches the scalar reference") {
  const auto& ref = simd::table(simd::Isa::Scalar);
  for (auto isa : {simd::Isa::Avx2}) {
    if (!simd::available(isa)) continue;
    const auto& t = simd::table(isa);
    CAPTURE(t.name);
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      const auto x = randn(n, 10), y = randn(n, 11), u = rand01(n, 12);
      const double dr = ref.dot(x.data(), y.data(), n), dt = t.dot(x.data(), y.data(), n);
      CHECK(std::abs(dr - dt) <= 1e-13 * (1.0 + std::sqrt(double(n))));

      auto a = y, b = y;
      ref.axpy(0.7, x.data(), a.data(), n);
      t.axpy(0.7, x.data(), b.data(), n);
      CHECK(max_gap(a, b) <= 1e-15);  // fused multiply-add rounds once

      a = u, b = u;
      ref.axpy2(0.3, x.data(), -1.1, y.data(), a.data(), n);
      t.axpy2(0.3, x.data(), -1.1, y.data(), b.data(), n);
      CHECK(max_gap(a, b) <= 1e-15);

      for (bool bridge : {false, true}) {
        std::vector<double> ra(n), rb(n);
        ref.brownian_row(0.37, u.data(), n, bridge, ra.data());
        t.brownian_row(0.37, u.data(), n, bridge, rb.data());
        CHECK(max_gap(ra, rb) <= 1e-16);
      }

      std::vector<double> lam(n), th(n);
      for (std::size_t j = 0; j < n; ++j) {
        lam[j] = 1.0 / double((j + 1) * (j + 1));
        th[j] = x[j];
      }
      for (double tt : {0.0, 1.0, 37.5, 1e6}) {
        double b1, v1, b2, v2;
        ref.filter_risk(lam.data(), th.data(), n, tt, &b1, &v1);
        t.filter_risk(lam.data(), th.data(), n, tt, &b2, &v2);
        CHECK(std::abs(b1 - b2) <= 1e-13 * (1.0 + b1));
        CHECK(std::abs(v1 - v2) <= 1e-13 * (1.0 + v1));
        std::vector<double> f1(n), f2(n);
        ref.flow_filter(lam.data(), th.data(), n, tt, f1.data());
        t.flow_filter(lam.data(), th.data(), n, tt, f2.data());
        CHECK(max_gap(f1, f2) <= 1e-14);
      }

      std::vector<double> r1(n), r2(n);
      ref.relu_scaled(x.data(), n, 0.25, r1.data());
      t.relu_scaled(x.data(), n, 0.25, r2.data());
      CHECK(max_gap(r1, r2) == 0.0);

      std::vector<double> tc(n), bf(n), fs(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double om = 2.0 * M_PI * u[i];
        tc[i] = 2.0 * std::cos(om);
        bf[i] = std::sin(-om);
        fs[i] = 0.0;
      }
      const std::size_t count = 300;
      std::vector<double> p1(count), p2(count);
      ref.sine_project(tc.data(), fs.data(), bf.data(), y.data(), n, count, p1.data());
      t.sine_project(tc.data(), fs.data(), bf.data(), y.data(), n, count, p2.data());
      double scale = 1.0;
      for (double v : y) scale += std::abs(v);
      CHECK(max_gap(p1, p2) <= 1e-12 * scale);
    }
  }
}

}  // TEST_SUITE
