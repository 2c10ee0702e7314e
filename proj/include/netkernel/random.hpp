#ifndef NETKERNEL_RANDOM_HPP
#define NETKERNEL_RANDOM_HPP
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace netkernel {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (seed, index); used for per-trial and per-replicate generators.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

// The std distributions are implementation-defined; these are not, so draws are
// reproducible across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  double u = 0.0;
  do {
    u = uniform01(rng);
  } while (u == 0.0);
  return u;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Standard normal by Box-Muller; one draw per call (the partner variate is discarded).
inline double standard_normal(Rng& rng) {
  const double u1 = uniform_open01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace netkernel

#endif  // NETKERNEL_RANDOM_HPP
