#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdc/hypervector.hpp"
#include "hdc/random.hpp"

namespace hdc {

/// How per-context bound prototypes are superposed into one class prototype.
/// Majority bipolarizes with seeded random tie-breaks (what the classifiers
/// use); IntSum thresholds the integer vote sum at zero deterministically.
enum class SuperpositionRule { Majority, IntSum };

/// Direct mode gives every context the same context vector (plain
/// superposition); Context mode draws a fresh random context vector per
/// context, which orthogonalizes the per-context prototypes.
enum class ContextMode { Direct, Context };

const char* context_mode_name(ContextMode mode);

struct MarginSimConfig {
  int dim = Hypervector::kDefaultDim;
  int n_classes = 13;
  std::vector<int> context_counts{3, 5, 7, 9, 11, 13, 15};  // odd
  std::vector<double> d0_grid{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
  int n_trials = 25;
  std::uint64_t seed = 0;
  SuperpositionRule superposition = SuperpositionRule::Majority;
  int threads = 1;
};

/// One (n_contexts, d0, mode) grid cell: trial means of the retrieval
/// distance, the nearest-wrong-class distance and the relative margin
/// (d_wrong - d_retrieve) / (d_wrong + d_retrieve), with standard errors
/// over trials.
struct MarginCell {
  int n_contexts = 0;
  double d0 = 0.0;
  ContextMode mode = ContextMode::Direct;
  double d_retrieve = 0.0;
  double d_wrong = 0.0;
  double margin = 0.0;
  double d_retrieve_stderr = 0.0;
  double d_wrong_stderr = 0.0;
  double margin_stderr = 0.0;
};

struct MarginSweepResult {
  MarginSimConfig config;
  /// Row-major over (context_counts, d0_grid, {Direct, Context}).
  std::vector<MarginCell> cells;

  const MarginCell& at(std::size_t context_index, std::size_t d0_index, ContextMode mode) const;
};

/// All class-and-context prototypes share one random base hypervector; each
/// flips its own random set of round(f * dim) positions with
/// f = (1 - sqrt(1 - 2 * d0)) / 2, so the expected pairwise distance is
/// 2 f (1 - f) = d0. Returned row-major: prototype of (class y, context p)
/// at index y * n_contexts + p.
std::vector<Hypervector> gen_prototypes(int n_classes, int n_contexts, double d0, int dim,
                                        RandomSource& rng);

/// Monte-Carlo estimate of one grid cell: per trial, build prototypes and
/// context vectors, superpose the bound prototypes per class, then measure
/// the distance from each bound ground-truth prototype to its own class
/// superposition (d_retrieve) and to the nearest wrong class (d_wrong),
/// averaged over every (class, context) pair. A zero-over-zero margin
/// counts as 0.
MarginCell run_cell(int n_classes, int n_contexts, double d0, int dim, ContextMode mode,
                    SuperpositionRule rule, int n_trials, const RandomSource& rng);

/// Full grid in both modes. Cell seeds derive from the config seed and the
/// cell's grid position, so results are independent of thread count.
MarginSweepResult sweep(const MarginSimConfig& config);

/// CSV export, one row per cell:
/// n_contexts,d0,mode,d_retrieve,d_wrong,margin,stderr
/// (stderr is the margin's standard error over trials).
std::string margin_csv(const MarginSweepResult& result);

}  // namespace hdc
