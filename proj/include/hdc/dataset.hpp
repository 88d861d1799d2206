#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hdc/encoding.hpp"

namespace hdc {

/// Synthetic acquisition protocol: per position session, every gesture is
/// performed for a fixed number of repetitions, each spanning a fixed number
/// of 50 ms feature windows. EMG patterns warp with limb position; the
/// accelerometer sees that position's gravity vector plus noise.
struct GenConfig {
  int n_gestures = 13;
  int n_positions = 8;
  int n_reps = 3;
  int windows_per_rep = 80;
  int n_channels = 64;

  double emg_noise_sigma = 0.25;        // per-window log-normal MAV noise
  double position_distortion = 0.6;     // blend strength of the position warp, in [0, 1]
  double accel_noise_sigma = 0.01;      // additive Gaussian accel noise, in g

  /// Position pairs forced to near-identical orientations (each member is
  /// the shared gravity vector tilted by 2 degrees).
  std::vector<std::pair<int, int>> paired_positions = {{0, 4}};

  std::uint64_t seed = 1;

  bool operator==(const GenConfig&) const = default;
};

struct Dataset {
  std::vector<FeatureWindow> windows;
  GenConfig config;
};

/// Deterministic synthetic dataset: identical config yields identical
/// windows. Gesture patterns are sparse log-normal channel activations;
/// each position applies a fixed channel-shift/gain warp of strength
/// position_distortion.
Dataset generate(const GenConfig& config);

/// The per-position unit gravity vectors the generator uses (paired
/// positions land within 2 degrees of a shared vector).
std::vector<std::array<double, 3>> position_orientations(const GenConfig& config);

/// Writes the window table (tab-separated, 6 significant digits) and a JSON
/// manifest sidecar at path + ".manifest.json" carrying the config and an
/// FNV-1a checksum of the table bytes.
void save(const Dataset& dataset, const std::string& path);

/// Reads a window table. When the manifest sidecar is present the table
/// checksum is verified and the config is restored; otherwise defaults are
/// assumed. Malformed tables, missing columns and checksum mismatches raise
/// DataError with distinct kinds.
Dataset load(const std::string& path);

/// 64-bit FNV-1a, used for dataset and model checksums.
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace hdc
