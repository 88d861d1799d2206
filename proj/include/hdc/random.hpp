#pragma once

#include <cmath>
#include <cstdint>

namespace hdc {

/// Deterministic counter-style random source (splitmix64 stream).
///
/// Identical seeds produce identical sequences on every platform: all state
/// is 64-bit unsigned arithmetic and the floating-point helpers use only the
/// basic IEEE operations. Instances are cheap values; they are not meant to
/// be shared across threads. Independent streams for sub-tasks are derived
/// with child(), which depends only on the construction seed and the key,
/// never on how much the parent has been consumed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Next 64 uniformly random bits.
  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Fair coin.
  bool next_bool() { return (next_u64() >> 63) != 0; }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be nonzero.
  std::uint64_t next_below(std::uint64_t n) {
    // Lemire's multiply-shift; bias is < 2^-64 * n, irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Consumes exactly two draws.
  double next_gaussian() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Independent stream keyed off this source's construction seed.
  RandomSource child(std::uint64_t key) const {
    return RandomSource(mix64(seed_ ^ mix64(key + 0xD1B54A32D192ED03ULL)));
  }

  /// Stateless 64-bit finalizer (splitmix64), also used for seed derivation.
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace hdc
