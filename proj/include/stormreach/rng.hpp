#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace stormreach {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for a (seed, tag...) tuple. Used to pre-split streams
/// so parallel work produces the same draws regardless of schedule.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

/// Uniform draw on the open interval (0, 1), built from 53 random bits.
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

/// Logistic(m, s) by inverse CDF. s == 0 returns m; one uniform is consumed
/// either way so stream positions stay aligned.
inline double sample_logistic(Rng& rng, double m, double s) {
  const double u = uniform_open(rng);
  if (s == 0.0) return m;
  return m + s * std::log(u / (1.0 - u));
}

/// Standard normal via Box-Muller; always consumes two uniforms.
inline double sample_standard_normal(Rng& rng) {
  const double u1 = uniform_open(rng);
  const double u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace stormreach
