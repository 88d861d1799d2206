#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hdc/architectures.hpp"
#include "hdc/encoding.hpp"
#include "hdc/memories.hpp"

namespace hdc {

/// The six tunable context-encoding parameters: per-axis quantization level
/// counts and endpoint distances of the accelerometer CIMs.
struct Genome {
  std::array<int, 3> levels{16, 16, 16};        // in [2, 64]
  std::array<double, 3> d_max{0.5, 0.5, 0.5};   // in [0, 1]

  bool operator==(const Genome&) const = default;

  std::array<CimParams, 3> to_cim_params() const;
};

inline constexpr int kGenomeMinLevels = 2;
inline constexpr int kGenomeMaxLevels = 64;

Genome clamp_genome(Genome g);

struct GaConfig {
  int population = 20;
  int generations = 15;
  int tournament = 3;
  double crossover_prob = 0.8;
  double mutation_prob = 0.15;        // per gene
  double mutation_scale_levels = 4.0; // Gaussian step, rounded
  double mutation_scale_dmax = 0.1;
  int fitness_folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct GaGenerationStats {
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Genome best_genome;
};

struct GaResult {
  Genome best;
  double best_fitness = 0.0;
  std::vector<GaGenerationStats> history;  // one entry per generation
};

/// Cross-validated accuracy of the accelerometer-context architecture with
/// CIMs built from the genome. Same genome, samples and seed give the same
/// fitness.
double fitness(const Genome& genome, std::span<const EncodedSample> samples,
               const ItemMemory& im, int folds, std::uint64_t seed);

/// Elitist generational GA: tournament selection, uniform crossover,
/// Gaussian mutation (integer genes rounded), elitism of one. Individual 0
/// of the initial population is the default genome, so the result is never
/// worse than that hand pick; the rest are random. Fitness values are cached
/// per genome. Deterministic in config.seed.
GaResult optimize(std::span<const EncodedSample> samples, const ItemMemory& im,
                  const GaConfig& config);

}  // namespace hdc
