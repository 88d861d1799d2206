#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/random.hpp"

namespace hdc {

/// Fixed-dimension bipolar hypervector, bit-packed into 64-bit words.
///
/// Bit value 1 maps to element +1 and bit value 0 to element -1, so binding
/// (element-wise product) is word-wise XNOR and Hamming distance is
/// XOR + popcount. Words beyond the logical dimension are kept zero so that
/// popcount-based operations never see stray bits.
class Hypervector {
 public:
  static constexpr int kDefaultDim = 10000;

  /// All elements -1 (all bits clear).
  explicit Hypervector(int dim);

  /// Each element independently +/-1 with probability 1/2.
  static Hypervector random(int dim, RandomSource& rng);

  int dim() const { return dim_; }
  int word_count() const { return static_cast<int>(words_.size()); }

  bool bit(int i) const { return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u; }
  void set_bit(int i, bool plus_one);
  void flip_bit(int i) { words_[static_cast<std::size_t>(i) >> 6] ^= 1ULL << (i & 63); }

  /// Element value as a signed integer, +1 or -1.
  int element(int i) const { return bit(i) ? 1 : -1; }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  /// Clears any bits at positions >= dim in the last word.
  void mask_tail();

  bool operator==(const Hypervector& other) const = default;

 private:
  int dim_;
  std::vector<std::uint64_t> words_;
};

/// Signed per-element vote counts for superposition. Adding a hypervector
/// with weight w adds w * element to every count; bipolarize() takes the
/// element-wise sign with randomized ties.
class Accumulator {
 public:
  explicit Accumulator(int dim);

  void add(const Hypervector& hv, std::int32_t weight = 1);

  /// sign(counts) as a hypervector; zero counts resolved by one rng coin
  /// each, consumed in index order.
  Hypervector bipolarize(RandomSource& rng) const;

  int dim() const { return dim_; }
  std::int64_t n_added() const { return n_added_; }
  std::span<const std::int32_t> counts() const { return counts_; }
  std::span<std::int32_t> counts() { return counts_; }
  void set_n_added(std::int64_t n) { n_added_ = n; }

  bool operator==(const Accumulator& other) const = default;

 private:
  int dim_;
  std::vector<std::int32_t> counts_;
  std::int64_t n_added_;
};

/// Element-wise product (XNOR on packed bits). Self-inverse: bind(a, a) is
/// the all-(+1) identity and bind(bind(a, b), b) == a.
Hypervector bind(const Hypervector& a, const Hypervector& b);

/// Cyclic rotation of elements by k positions toward higher indices.
/// Distance-preserving bijection; k may be any integer.
Hypervector permute(const Hypervector& a, long long k);

/// Element-wise majority; ties (even counts only) broken by rng coins.
Hypervector bundle(std::span<const Hypervector> hvs, RandomSource& rng);

/// Element-wise negation.
Hypervector negate(const Hypervector& a);

/// Normalized Hamming distance in [0, 1].
double hamming(const Hypervector& a, const Hypervector& b);

/// Sum of element products; equals dim * (1 - 2 * hamming).
std::int64_t dot(const Hypervector& a, const Hypervector& b);

}  // namespace hdc
