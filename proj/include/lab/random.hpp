#pragma once

#include <cstdint>

// Counter-based random numbers. Every variate is a pure function of
// (seed, stream, index), so results do not depend on evaluation order or on
// how work is split across threads.
//
//   mix64            splitmix64 finalizer (Stafford variant 13)
//   uniform          53-bit mantissa from mix64(seed, stream, index), in (0,1)
//   normal           Marsaglia polar method; attempt k of variate `index`
//                    draws its two uniforms from sub-counters 2k and 2k+1
namespace lab::rng {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-task seed from a master seed and a task index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x8bb84b93962eacc9ULL));
}

/// Named streams keep independent quantities decorrelated under one seed.
enum Stream : std::uint64_t {
  kGsmNoise = 1,
  kInputs = 2,
  kLabelNoise = 3,
  kTestInputs = 4,
  kWeights = 5,
  kReadout = 6,
  kDirection = 7,
  kDesign = 8,
};

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace lab::rng
