#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace driftlab {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream owned by path `index` under master seed `master`:
/// mix64(mix64(master) XOR index). Independent of how paths are scheduled.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ index);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng{stream_seed(master, index)};
}

/// Uniform on the open interval (0, 1), 53-bit resolution.
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform_open(rng)) / rate;
}

}  // namespace driftlab
