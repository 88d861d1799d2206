#include "hdc/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "hdc/error.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

namespace {

// Channel hypervectors as contiguous +/-1 doubles so the per-window
// accumulation below is a plain vectorizable multiply-add.
std::vector<double> materialize_signs(const ItemMemory& im) {
  const int dim = im.dim();
  const int channels = im.size();
  std::vector<double> signs(static_cast<std::size_t>(channels) * static_cast<std::size_t>(dim));
  for (int ch = 0; ch < channels; ++ch) {
    const Hypervector& hv = im.entry(ch);
    double* row = signs.data() + static_cast<std::size_t>(ch) * static_cast<std::size_t>(dim);
    for (int i = 0; i < dim; ++i) row[i] = hv.bit(i) ? 1.0 : -1.0;
  }
  return signs;
}

// Weighted vote accumulation, channel-major so the summation order (and
// therefore every rounding step) is fixed.
void spatial_votes(std::span<const double> mav, const std::vector<double>& signs, int dim,
                   std::vector<double>& acc) {
  acc.assign(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t ch = 0; ch < mav.size(); ++ch) {
    const double w = mav[ch];
    const double* row = signs.data() + ch * static_cast<std::size_t>(dim);
    double* out = acc.data();
    for (int i = 0; i < dim; ++i) out[i] += w * row[i];
  }
}

Hypervector votes_to_hv(const std::vector<double>& acc, RandomSource& rng) {
  Hypervector hv(static_cast<int>(acc.size()));
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const bool plus = acc[i] > 0.0 || (acc[i] == 0.0 && rng.next_bool());
    if (plus) hv.set_bit(static_cast<int>(i), true);
  }
  return hv;
}

struct GroupRange {
  std::size_t begin;
  std::size_t end;
};

std::vector<GroupRange> split_groups(std::span<const FeatureWindow> windows) {
  std::vector<GroupRange> groups;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= windows.size(); ++i) {
    const bool boundary = i == windows.size() || windows[i].position != windows[start].position ||
                          windows[i].gesture != windows[start].gesture ||
                          windows[i].repetition != windows[start].repetition;
    if (boundary) {
      groups.push_back({start, i});
      start = i;
    }
  }
  return groups;
}

}  // namespace

Hypervector encode_spatial(std::span<const double> mav, const ItemMemory& im, RandomSource& rng) {
  require(static_cast<int>(mav.size()) == im.size(),
          "channel count does not match item memory size");
  const std::vector<double> signs = materialize_signs(im);
  std::vector<double> acc;
  spatial_votes(mav, signs, im.dim(), acc);
  return votes_to_hv(acc, rng);
}

Hypervector encode_temporal(std::span<const Hypervector> spatials) {
  require(static_cast<int>(spatials.size()) == kTemporalSpan,
          "temporal encoding expects exactly kTemporalSpan hypervectors");
  Hypervector out = spatials[kTemporalSpan - 1];  // newest stays unpermuted
  for (int i = kTemporalSpan - 2; i >= 0; --i) {
    out = bind(out, permute(spatials[static_cast<std::size_t>(i)], kTemporalSpan - 1 - i));
  }
  return out;
}

int quantize_accel(double accel_g, int levels) {
  require(levels >= 2, "quantization needs at least two levels");
  const double clamped = std::clamp(accel_g, -1.0, 1.0);
  return static_cast<int>(std::lround((clamped + 1.0) * 0.5 * (levels - 1)));
}

Hypervector encode_accel_context(const std::array<double, 3>& accel,
                                 const std::array<ContinuousItemMemory, 3>& cims) {
  const Hypervector& x = cims[0].level(quantize_accel(accel[0], cims[0].levels()));
  const Hypervector& y = cims[1].level(quantize_accel(accel[1], cims[1].levels()));
  const Hypervector& z = cims[2].level(quantize_accel(accel[2], cims[2].levels()));
  return bind(x, bind(y, z));
}

EncodeResult encode_stream(std::span<const FeatureWindow> windows, const ItemMemory& im,
                           const RandomSource& rng, int threads) {
  EncodeResult result;
  if (windows.empty()) return result;

  const int dim = im.dim();
  const std::vector<double> signs = materialize_signs(im);
  const std::vector<GroupRange> groups = split_groups(windows);

  std::vector<std::vector<EncodedSample>> per_group(groups.size());
  std::vector<char> skipped(groups.size(), 0);

  parallel_for(groups.size(), threads, [&](std::size_t g) {
    const auto [begin, end] = groups[g];
    const std::size_t count = end - begin;
    if (count < static_cast<std::size_t>(kTemporalSpan)) {
      skipped[g] = 1;
      return;
    }
    const FeatureWindow& head = windows[begin];
    const RandomSource group_rng = rng.child(static_cast<std::uint64_t>(head.position))
                                       .child(static_cast<std::uint64_t>(head.gesture))
                                       .child(static_cast<std::uint64_t>(head.repetition));

    std::vector<Hypervector> spatials;
    spatials.reserve(count);
    std::vector<double> acc;
    for (std::size_t w = begin; w < end; ++w) {
      require(static_cast<int>(windows[w].mav.size()) == im.size(),
              "channel count does not match item memory size");
      spatial_votes(windows[w].mav, signs, dim, acc);
      RandomSource tie_rng = group_rng.child(static_cast<std::uint64_t>(windows[w].window_index));
      spatials.push_back(votes_to_hv(acc, tie_rng));
    }

    auto& out = per_group[g];
    out.reserve(count - kTemporalSpan + 1);
    for (std::size_t s = 0; s + kTemporalSpan <= count; ++s) {
      EncodedSample sample(encode_temporal(
          std::span<const Hypervector>(spatials.data() + s, kTemporalSpan)));
      sample.gesture = head.gesture;
      sample.position = head.position;
      sample.repetition = head.repetition;
      for (int axis = 0; axis < 3; ++axis) {
        double sum = 0.0;
        for (int j = 0; j < kTemporalSpan; ++j) {
          sum += windows[begin + s + static_cast<std::size_t>(j)].accel[static_cast<std::size_t>(axis)];
        }
        sample.accel_mean[static_cast<std::size_t>(axis)] = sum / kTemporalSpan;
      }
      out.push_back(std::move(sample));
    }
  });

  std::size_t total = 0;
  for (const auto& g : per_group) total += g.size();
  result.samples.reserve(total);
  for (std::size_t g = 0; g < per_group.size(); ++g) {
    result.skipped_short_groups += skipped[g];
    for (auto& s : per_group[g]) result.samples.push_back(std::move(s));
  }
  return result;
}

}  // namespace hdc
