#include "lab/random.hpp"

#include <cmath>

namespace lab::rng {

namespace {

std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                  std::uint64_t sub) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ index);
  return mix64(h ^ (sub * 0xc2b2ae3d27d4eb4fULL));
}

double to_open_unit(std::uint64_t bits) noexcept {
  // (k + 0.5) / 2^53 is never 0 or 1.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  return to_open_unit(key(seed, stream, index, 0));
}

double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const double u = 2.0 * to_open_unit(key(seed, stream, index, 2 * attempt + 1)) - 1.0;
    const double v = 2.0 * to_open_unit(key(seed, stream, index, 2 * attempt + 2)) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace lab::rng
