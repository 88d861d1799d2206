#include "hdc/hypervector.hpp"

#include <bit>

#include "hdc/error.hpp"

namespace hdc {

namespace {

int words_for(int dim) { return (dim + 63) / 64; }

void check_same_dim(const Hypervector& a, const Hypervector& b) {
  require(a.dim() == b.dim(), "hypervector dimension mismatch");
}

// Logical shift of a dim-bit little-endian bit string toward higher indices.
// Bits shifted past dim are dropped; vacated low bits are zero.
std::vector<std::uint64_t> shift_up(std::span<const std::uint64_t> in, int k) {
  const int n = static_cast<int>(in.size());
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n), 0);
  const int q = k >> 6;
  const int r = k & 63;
  for (int w = n - 1; w >= q; --w) {
    std::uint64_t v = in[static_cast<std::size_t>(w - q)] << r;
    if (r != 0 && w - q - 1 >= 0) v |= in[static_cast<std::size_t>(w - q - 1)] >> (64 - r);
    out[static_cast<std::size_t>(w)] = v;
  }
  return out;
}

// Logical shift toward lower indices; bits below index 0 are dropped.
std::vector<std::uint64_t> shift_down(std::span<const std::uint64_t> in, int k) {
  const int n = static_cast<int>(in.size());
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n), 0);
  const int q = k >> 6;
  const int r = k & 63;
  for (int w = 0; w + q < n; ++w) {
    std::uint64_t v = in[static_cast<std::size_t>(w + q)] >> r;
    if (r != 0 && w + q + 1 < n) v |= in[static_cast<std::size_t>(w + q + 1)] << (64 - r);
    out[static_cast<std::size_t>(w)] = v;
  }
  return out;
}

}  // namespace

Hypervector::Hypervector(int dim) : dim_(dim) {
  require(dim >= 1, "hypervector dimension must be positive");
  words_.assign(static_cast<std::size_t>(words_for(dim)), 0);
}

Hypervector Hypervector::random(int dim, RandomSource& rng) {
  Hypervector hv(dim);
  for (auto& w : hv.words_) w = rng.next_u64();
  hv.mask_tail();
  return hv;
}

void Hypervector::set_bit(int i, bool plus_one) {
  const std::uint64_t mask = 1ULL << (i & 63);
  if (plus_one) {
    words_[static_cast<std::size_t>(i) >> 6] |= mask;
  } else {
    words_[static_cast<std::size_t>(i) >> 6] &= ~mask;
  }
}

void Hypervector::mask_tail() {
  const int tail = dim_ & 63;
  if (tail != 0) words_.back() &= (~0ULL >> (64 - tail));
}

Accumulator::Accumulator(int dim) : dim_(dim), n_added_(0) {
  require(dim >= 1, "accumulator dimension must be positive");
  counts_.assign(static_cast<std::size_t>(dim), 0);
}

void Accumulator::add(const Hypervector& hv, std::int32_t weight) {
  require(hv.dim() == dim_, "accumulator/hypervector dimension mismatch");
  const auto words = hv.words();
  for (int i = 0; i < dim_; ++i) {
    const std::int32_t sign = ((words[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u) ? 1 : -1;
    counts_[static_cast<std::size_t>(i)] += weight * sign;
  }
  ++n_added_;
}

Hypervector Accumulator::bipolarize(RandomSource& rng) const {
  Hypervector hv(dim_);
  for (int i = 0; i < dim_; ++i) {
    const std::int32_t c = counts_[static_cast<std::size_t>(i)];
    const bool plus = c > 0 || (c == 0 && rng.next_bool());
    if (plus) hv.set_bit(i, true);
  }
  return hv;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  check_same_dim(a, b);
  Hypervector out(a.dim());
  auto ow = out.words();
  auto aw = a.words();
  auto bw = b.words();
  for (std::size_t w = 0; w < ow.size(); ++w) ow[w] = ~(aw[w] ^ bw[w]);
  out.mask_tail();
  return out;
}

Hypervector permute(const Hypervector& a, long long k) {
  const int dim = a.dim();
  int shift = static_cast<int>(((k % dim) + dim) % dim);
  if (shift == 0) return a;
  Hypervector out(dim);
  auto up = shift_up(a.words(), shift);
  auto down = shift_down(a.words(), dim - shift);
  auto ow = out.words();
  for (std::size_t w = 0; w < ow.size(); ++w) ow[w] = up[w] | down[w];
  out.mask_tail();
  return out;
}

Hypervector bundle(std::span<const Hypervector> hvs, RandomSource& rng) {
  require(!hvs.empty(), "bundle requires a nonempty list");
  Accumulator acc(hvs.front().dim());
  for (const auto& hv : hvs) acc.add(hv);
  return acc.bipolarize(rng);
}

Hypervector negate(const Hypervector& a) {
  Hypervector out(a.dim());
  auto ow = out.words();
  auto aw = a.words();
  for (std::size_t w = 0; w < ow.size(); ++w) ow[w] = ~aw[w];
  out.mask_tail();
  return out;
}

double hamming(const Hypervector& a, const Hypervector& b) {
  check_same_dim(a, b);
  auto aw = a.words();
  auto bw = b.words();
  std::int64_t diff = 0;
  for (std::size_t w = 0; w < aw.size(); ++w) diff += std::popcount(aw[w] ^ bw[w]);
  return static_cast<double>(diff) / a.dim();
}

std::int64_t dot(const Hypervector& a, const Hypervector& b) {
  check_same_dim(a, b);
  auto aw = a.words();
  auto bw = b.words();
  std::int64_t diff = 0;
  for (std::size_t w = 0; w < aw.size(); ++w) diff += std::popcount(aw[w] ^ bw[w]);
  return static_cast<std::int64_t>(a.dim()) - 2 * diff;
}

}  // namespace hdc
