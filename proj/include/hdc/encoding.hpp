#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hdc/hypervector.hpp"
#include "hdc/memories.hpp"
#include "hdc/random.hpp"

namespace hdc {

/// Number of consecutive windows combined into one encoded sample
/// (5 x 50 ms = 250 ms of signal, sliding by one window).
inline constexpr int kTemporalSpan = 5;

/// One 50 ms feature frame: per-channel EMG mean absolute value plus the
/// mean acceleration of the three axes, with its labels.
struct FeatureWindow {
  std::vector<double> mav;             // per channel, >= 0
  std::array<double, 3> accel{};       // x, y, z in g
  int gesture = 0;
  int position = 0;
  int repetition = 0;
  int window_index = 0;
};

/// Projection of one temporal span: the EMG hypervector plus the span-mean
/// accelerometer reading that provides its context.
struct EncodedSample {
  Hypervector emg_hv;
  std::optional<Hypervector> context_hv;
  std::array<double, 3> accel_mean{};
  int gesture = 0;
  int position = 0;
  int repetition = 0;

  EncodedSample() : emg_hv(1) {}
  explicit EncodedSample(Hypervector hv) : emg_hv(std::move(hv)) {}
};

/// Bipolarized weighted sum of the channel hypervectors with the MAV values
/// as weights. Zero sums are tie-broken by the rng, one coin per tie in
/// index order. Scale-invariant: mav and c*mav (c > 0) encode identically.
Hypervector encode_spatial(std::span<const double> mav, const ItemMemory& im, RandomSource& rng);

/// Permute-and-multiply across exactly kTemporalSpan spatial hypervectors,
/// ordered oldest to newest. The newest is unpermuted; each step back in
/// time adds one rotation.
Hypervector encode_temporal(std::span<const Hypervector> spatials);

/// Clamp to [-1g, +1g] and quantize uniformly into `levels` steps.
int quantize_accel(double accel_g, int levels);

/// Quantize each axis against its own continuous item memory and bind the
/// three level hypervectors into a single context hypervector.
Hypervector encode_accel_context(const std::array<double, 3>& accel,
                                 const std::array<ContinuousItemMemory, 3>& cims);

struct EncodeResult {
  std::vector<EncodedSample> samples;
  int skipped_short_groups = 0;  // repetitions shorter than kTemporalSpan
};

/// Slides a kTemporalSpan window (stride 1) over each repetition run and
/// encodes every span. Windows must be time-ordered within a repetition; a
/// repetition of n windows yields max(0, n - kTemporalSpan + 1) samples.
/// Tie-break randomness per window is derived from
/// (rng seed, position, gesture, repetition, window index), which keeps the
/// result independent of threading and of which other samples are present.
EncodeResult encode_stream(std::span<const FeatureWindow> windows, const ItemMemory& im,
                           const RandomSource& rng, int threads = 1);

}  // namespace hdc
