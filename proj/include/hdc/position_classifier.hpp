#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hdc {

/// One labeled accelerometer reading.
struct PositionSample {
  std::array<double, 3> accel{};
  int position = 0;
};

struct PositionTrainConfig {
  int epochs = 400;
  double l2 = 1e-5;         // weight decay
  double lr0 = 6.0;         // step size, held constant through the warm phase
  double lr_decay = 0.02;   // anneal rate after the warm phase
  int batches = 32;         // cyclic mini-batches per epoch (stride partition)
  double warm_frac = 0.7;   // fraction of steps at constant lr0 before annealing
};

/// One-vs-rest linear maximum-margin classifier over the three accelerometer
/// axes. Parameters are kept as 32-bit floats, matching how they are stored
/// on disk, so a saved and reloaded model scores identically.
struct LinearPositionModel {
  std::vector<int> position_ids;               // ascending
  std::vector<std::array<float, 3>> weights;   // per position
  std::vector<float> biases;

  int n_positions() const { return static_cast<int>(position_ids.size()); }

  /// Highest-scoring position id; ties go to the lowest index.
  int predict(const std::array<double, 3>& accel) const;
  int predict_index(const std::array<double, 3>& accel) const;
};

/// Hinge-loss subgradient training of the one-vs-rest classifiers, visiting
/// samples in input order for a fixed number of epochs. Deterministic:
/// identical samples and config give an identical model.
LinearPositionModel train_position(std::span<const PositionSample> samples,
                                   const PositionTrainConfig& config = {});

/// Footprint of a stored-support-vector budget: n_vectors * n_features
/// 32-bit floats.
constexpr std::int64_t stored_vector_bits(std::int64_t n_vectors, std::int64_t n_features = 3) {
  return n_vectors * n_features * 32;
}

/// Budget convention used by the footprint reports: 50 stored vectors of
/// three 32-bit features (4,800 bits).
std::int64_t parameter_bits(const LinearPositionModel& model, int n_vectors = 50);

/// What this primal model actually stores: P * (3 weights + 1 bias) floats.
std::int64_t primal_parameter_bits(const LinearPositionModel& model);

}  // namespace hdc
