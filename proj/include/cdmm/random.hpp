#pragma once

// Reproducible random streams. Every consumer derives its own generator from
// (root seed, stream tag, index), so results never depend on the order in
// which workers or rounds are evaluated.

#include <cmath>
#include <cstdint>
#include <random>

namespace cdmm {

enum class StreamTag : std::uint32_t {
  kCoefficients = 1,
  kTiming = 2,
  kStragglers = 3,
  kData = 4,
  kVector = 5,
  kBaseline = 6,
};

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t root, StreamTag tag, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// Uniform in [0, 1) with 53 random bits; avoids implementation-defined
// distribution objects so streams are identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline constexpr double kCoefficientExclusion = 1e-6;

// Uniform on [-1, 1] with the ball |v| < 1e-6 redrawn.
inline double draw_coefficient(Rng& rng) {
  for (;;) {
    const double v = uniform(rng, -1.0, 1.0);
    if (std::abs(v) >= kCoefficientExclusion) return v;
  }
}

inline double draw_exponential(Rng& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

inline double draw_normal(Rng& rng) {
  // Box-Muller; the second variate is discarded to keep streams stateless.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::uint64_t draw_index(Rng& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(bound)) % bound;
}

}  // namespace cdmm
