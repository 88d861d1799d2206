#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdc/encoding.hpp"
#include "hdc/memories.hpp"
#include "hdc/position_classifier.hpp"

namespace hdc {

/// The four classifier variants for multi-limb-position gesture recognition.
enum class Architecture {
  DirectSuperposition,       // one AM, prototypes superposed across positions
  DualStage,                 // position classifier selects a per-position AM
  ContextOrthogonalization,  // position-keyed context binding into one AM
  AccelCimContext,           // accelerometer-derived CIM context binding
};

const char* architecture_name(Architecture arch);
std::optional<Architecture> architecture_from_name(const std::string& name);

/// Seed-tree keys: every derived component owns a fixed child of the model's
/// master seed so that rebuilding any part is order-independent.
namespace seed_key {
inline constexpr std::uint64_t kItemMemory = 1;
inline constexpr std::uint64_t kContextMemory = 2;
inline constexpr std::uint64_t kCim = 3;   // then .child(axis)
inline constexpr std::uint64_t kAm = 4;    // then .child(am index)
inline constexpr std::uint64_t kEncode = 5;
inline constexpr std::uint64_t kCrossVal = 6;  // then .child(fold)
}  // namespace seed_key

struct TrainConfig {
  int dim = Hypervector::kDefaultDim;
  PositionTrainConfig position;
  /// Per-axis CIM encoding parameters for AccelCimContext (x, y, z).
  std::array<CimParams, 3> cim_params{{{59, 1.0}, {55, 0.5}, {14, 0.6}}};
};

/// A trained classifier. Item/context/continuous memories are regenerable
/// from the seed tree; the accumulators and prototypes are the learned state.
struct Model {
  Architecture architecture = Architecture::DirectSuperposition;
  int dim = Hypervector::kDefaultDim;
  std::uint64_t master_seed = 0;
  std::vector<int> gesture_ids;   // ascending
  std::vector<int> position_ids;  // ascending
  ItemMemory item_memory;
  std::vector<AssociativeMemory> ams;  // one, or one per position for DualStage
  std::optional<ContextMemory> context_memory;
  std::optional<std::array<ContinuousItemMemory, 3>> cims;
  std::optional<LinearPositionModel> position_model;
  std::array<CimParams, 3> cim_params{{{59, 1.0}, {55, 0.5}, {14, 0.6}}};

  int gesture_index(int gesture_id) const;
  int position_index(int position_id) const;
};

/// The item memory the pipeline pairs with a given master seed.
ItemMemory build_model_item_memory(std::uint64_t master_seed, int n_channels, int dim);

/// Tie-break source for encode_stream under a given master seed.
RandomSource encode_rng(std::uint64_t master_seed);

/// Trains one architecture on encoded samples. The samples define the
/// gesture and position label sets; DualStage and ContextOrthogonalization
/// additionally train the linear position classifier from the span-mean
/// accelerometer readings.
Model train(Architecture arch, std::span<const EncodedSample> samples, const ItemMemory& im,
            const TrainConfig& config, std::uint64_t master_seed);

struct DecisionTrace {
  int predicted_gesture = -1;
  int predicted_gesture_index = -1;
  int selected_position_index = -1;       // DualStage / ContextOrthogonalization only
  std::vector<double> distances;          // per gesture, in model gesture order
};

/// Classifies one encoded sample; returns the winning gesture id plus the
/// full per-class distance vector.
std::pair<int, DecisionTrace> infer(const Model& model, const EncodedSample& sample);

struct EvalReport {
  std::size_t n_samples = 0;
  double overall_accuracy = 0.0;
  std::vector<int> position_ids;               // positions present in the test data
  std::vector<double> per_position_accuracy;   // aligned with position_ids
  std::vector<std::int64_t> per_position_counts;
  std::vector<int> gesture_ids;
  std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
  /// Interference diagnostics: distances from queries to their own-class and
  /// nearest wrong-class prototypes, and the resulting margin.
  double mean_true_class_distance = 0.0;
  double mean_wrong_class_distance = 0.0;
  double mean_margin = 0.0;
  std::vector<double> fold_accuracies;  // cross-validation only
};

EvalReport evaluate(const Model& model, std::span<const EncodedSample> samples);

/// Unit of fold assignment. Sample granularity spreads the encoded samples
/// of each (gesture, position) cell across folds; Repetition granularity
/// keeps each repetition run intact, which is stricter (no temporal overlap
/// between train and test) but needs folds <= repetitions per cell worth of
/// slack to stay balanced.
enum class FoldGranularity { Sample, Repetition };

struct CrossValConfig {
  int folds = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  FoldGranularity granularity = FoldGranularity::Sample;
  TrainConfig train;
};

/// Stratified k-fold cross-validation over encoded samples (stratified by
/// gesture x position). Fold assignment, per-fold seeds and the aggregated
/// report are all deterministic in the config seed and independent of the
/// worker-thread count.
EvalReport cross_validate(Architecture arch, std::span<const EncodedSample> samples,
                          const ItemMemory& im, const CrossValConfig& config);

struct FootprintReport {
  int n_ams = 0;
  int n_classes = 0;
  int dim = 0;
  std::int64_t prototype_bits = 0;
  std::int64_t position_model_bits = 0;  // stored-vector budget, 0 when absent
  std::int64_t total_bits = 0;           // prototype_bits + position_model_bits
  bool memories_counted = false;
  std::int64_t item_memory_bits = 0;     // populated when memories_counted
  std::int64_t context_memory_bits = 0;
  std::int64_t cim_bits = 0;
  std::int64_t total_with_memories = 0;
};

/// Parameter accounting. Prototypes dominate: one dim-bit vector per class
/// per AM. Item/context/continuous memories regenerate from seeds and count
/// zero bits unless count_memories asks for the explicit tally.
FootprintReport footprint_bits(const Model& model, bool count_memories = false);

struct ContextMatrix {
  std::vector<int> position_ids;
  std::vector<std::vector<double>> distances;  // symmetric, zero diagonal
};

/// Pairwise Hamming distances between per-position bundled context
/// hypervectors formed by CIM-encoding each sample's accelerometer reading.
ContextMatrix context_distance_matrix(std::span<const EncodedSample> samples,
                                      const std::array<ContinuousItemMemory, 3>& cims,
                                      std::uint64_t seed);

/// Online update through superposition: adds the new samples to the class
/// accumulators (with the architecture's context binding) and re-bipolarizes.
/// Equivalent to retraining from scratch on the concatenated sample stream.
/// Not available for DualStage.
Model update(const Model& model, std::span<const EncodedSample> new_samples);

}  // namespace hdc
