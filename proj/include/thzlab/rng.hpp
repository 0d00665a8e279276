#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace thzlab {

namespace detail {

inline constexpr std::uint64_t kMixGamma = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Derives an independent stream seed from a master seed and a tag path,
/// e.g. mix_seed(master, kMobilityStream, user_index). Adding or removing
/// one consumer never perturbs the streams of the others.
template <typename... Tags>
constexpr std::uint64_t mix_seed(std::uint64_t master, Tags... tags) {
  std::uint64_t s = detail::mix64(master + detail::kMixGamma);
  ((s = detail::mix64(s ^ detail::mix64(static_cast<std::uint64_t>(tags) + detail::kMixGamma))),
   ...);
  return s;
}

// Stream tags used across the library.
inline constexpr std::uint64_t kMobilityStream = 0x01;
inline constexpr std::uint64_t kShadowStream = 0x02;
inline constexpr std::uint64_t kPolicyStream = 0x03;
inline constexpr std::uint64_t kTrainStream = 0x04;

/// Seeded generator with explicit distributions. The draws are defined in
/// terms of raw 64-bit outputs only, so a given seed yields the same stream
/// on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform index in [0, n); n must be positive. Modulo bias is below
  /// n / 2^64, irrelevant for the index ranges used here.
  std::size_t uniform_index(std::size_t n) { return next_u64() % n; }

  /// Box-Muller normal draw; always consumes exactly two uniforms.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// One-shot N(0, stddev^2) draw addressed by key, for fields sampled
/// independently per (slot, user, ap) without materializing a stream.
inline double normal_at(std::uint64_t key, double stddev) {
  std::uint64_t s = key;
  const auto draw = [&s] {
    s += detail::kMixGamma;
    return detail::mix64(s);
  };
  const double u1 = (static_cast<double>(draw() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(draw() >> 11) * 0x1.0p-53;
  return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace thzlab
