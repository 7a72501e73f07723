#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace goalrba {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent sub-stream seeds from one
// scenario seed so that e.g. channel draws do not depend on policy choices.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  return mix_seed(mix_seed(seed ^ mix_seed(tag)) + index);
}

// Stream tags.
enum : std::uint64_t {
  kStreamGains = 1,
  kStreamWorkload = 2,
  kStreamExpected = 3,
  kStreamInit = 4,
  kStreamBatch = 5,
};

// Uniform in [0, 1) with 53 random bits. Hand-rolled rather than
// std::uniform_real_distribution so draws are identical across standard
// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

// Box-Muller, one variate per call.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename Container>
void shuffle_in_place(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    using std::swap;
    swap(c[i - 1], c[j]);
  }
}

}  // namespace goalrba
