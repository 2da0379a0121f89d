#pragma once

// Seed derivation. Every random stream in the project is derived from one
// user seed plus a stream label, so serial and parallel runs agree.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace arterial {

using Rng = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a, stable across platforms (std::hash is not).
[[nodiscard]] constexpr std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return derive_seed(seed, stable_hash(label));
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng{derive_seed(seed, label)};
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng{derive_seed(seed, stream)};
}

/// Uniform on the open interval (0, 1).
[[nodiscard]] inline double uniform_open(Rng& rng) {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

[[nodiscard]] inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>{0.0, 1.0}(rng);
}

/// log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
/// variate itself underflows to zero.
[[nodiscard]] inline double log_gamma_variate(Rng& rng, double shape) {
  if (shape >= 1.0) return std::log(std::gamma_distribution<double>{shape, 1.0}(rng));
  // Gamma(a) = Gamma(a + 1) * U^(1/a)
  double g = std::gamma_distribution<double>{shape + 1.0, 1.0}(rng);
  return std::log(g) + std::log(uniform_open(rng)) / shape;
}

}  // namespace arterial
