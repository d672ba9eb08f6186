// rng.hpp - reproducible random streams
//
// Every random tensor is drawn from its own std::mt19937_64 stream. The
// stream for (seed, stream_id) is seeded with
//     splitmix64_mix(seed + (stream_id + 1) * 0x9E3779B97F4A7C15)
// where splitmix64_mix is the SplitMix64 output finalizer. Uniform doubles
// take the top 53 bits of one draw; normals use Box-Muller on two uniforms
// (cosine branch only). None of this depends on std:: distributions, whose
// output is implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace satoggle {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return splitmix64_mix(seed + (stream_id + 1) * 0x9E3779B97F4A7C15ull);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return std::mt19937_64(derive_seed(seed, stream_id));
}

// Uniform on [0, 1).
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& gen) {
  const double u1 = 1.0 - uniform01(gen);  // (0, 1]
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace satoggle
