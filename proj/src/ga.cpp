#include "hdc/ga.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "hdc/error.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

namespace {

auto genome_key(const Genome& g) {
  return std::make_tuple(g.levels[0], g.levels[1], g.levels[2], g.d_max[0], g.d_max[1],
                         g.d_max[2]);
}

Genome random_genome(RandomSource& rng) {
  Genome g;
  for (int axis = 0; axis < 3; ++axis) {
    g.levels[static_cast<std::size_t>(axis)] =
        kGenomeMinLevels +
        static_cast<int>(rng.next_below(kGenomeMaxLevels - kGenomeMinLevels + 1));
    g.d_max[static_cast<std::size_t>(axis)] = rng.next_unit();
  }
  return g;
}

Genome tournament_pick(const std::vector<Genome>& pop, const std::vector<double>& fit,
                       int tournament, RandomSource& rng) {
  std::size_t best = static_cast<std::size_t>(rng.next_below(pop.size()));
  for (int i = 1; i < tournament; ++i) {
    const std::size_t challenger = static_cast<std::size_t>(rng.next_below(pop.size()));
    if (fit[challenger] > fit[best]) best = challenger;
  }
  return pop[best];
}

Genome crossover(const Genome& a, const Genome& b, RandomSource& rng) {
  Genome child = a;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (rng.next_bool()) child.levels[axis] = b.levels[axis];
    if (rng.next_bool()) child.d_max[axis] = b.d_max[axis];
  }
  return child;
}

void mutate(Genome& g, const GaConfig& config, RandomSource& rng) {
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (rng.next_unit() < config.mutation_prob) {
      g.levels[axis] += static_cast<int>(
          std::lround(rng.next_gaussian() * config.mutation_scale_levels));
    }
    if (rng.next_unit() < config.mutation_prob) {
      g.d_max[axis] += rng.next_gaussian() * config.mutation_scale_dmax;
    }
  }
  g = clamp_genome(g);
}

}  // namespace

std::array<CimParams, 3> Genome::to_cim_params() const {
  return {CimParams{levels[0], d_max[0]}, CimParams{levels[1], d_max[1]},
          CimParams{levels[2], d_max[2]}};
}

Genome clamp_genome(Genome g) {
  for (std::size_t axis = 0; axis < 3; ++axis) {
    g.levels[axis] = std::clamp(g.levels[axis], kGenomeMinLevels, kGenomeMaxLevels);
    g.d_max[axis] = std::clamp(g.d_max[axis], 0.0, 1.0);
  }
  return g;
}

double fitness(const Genome& genome, std::span<const EncodedSample> samples,
               const ItemMemory& im, int folds, std::uint64_t seed) {
  const Genome g = clamp_genome(genome);
  require(g == genome, "fitness: genome out of bounds");
  require(!samples.empty(), "fitness: empty sample set");
  CrossValConfig cv;
  cv.folds = folds;
  cv.seed = seed;
  cv.threads = 1;
  cv.train.dim = samples[0].emg_hv.dim();
  cv.train.cim_params = genome.to_cim_params();
  return cross_validate(Architecture::AccelCimContext, samples, im, cv).overall_accuracy;
}

GaResult optimize(std::span<const EncodedSample> samples, const ItemMemory& im,
                  const GaConfig& config) {
  require(config.population >= 2, "ga: population must be at least 2");
  require(config.generations >= 1, "ga: need at least one generation");
  require(config.tournament >= 1, "ga: tournament size must be positive");
  require(config.crossover_prob >= 0.0 && config.crossover_prob <= 1.0,
          "ga: crossover probability must lie in [0, 1]");
  require(config.mutation_prob >= 0.0 && config.mutation_prob <= 1.0,
          "ga: mutation probability must lie in [0, 1]");
  require(config.fitness_folds >= 2, "ga: fitness folds must be at least 2");

  const RandomSource root(config.seed);
  const std::uint64_t fitness_seed = root.child(3).seed();

  std::vector<Genome> pop(static_cast<std::size_t>(config.population));
  pop[0] = Genome{};  // hand-pick anchor; elitism keeps its fitness as a floor
  for (std::size_t i = 1; i < pop.size(); ++i) {
    RandomSource rng = root.child(1).child(i);
    pop[i] = random_genome(rng);
  }

  std::map<decltype(genome_key(Genome{})), double> cache;
  const auto evaluate_population = [&](const std::vector<Genome>& genomes) {
    std::vector<double> fit(genomes.size(), 0.0);
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < genomes.size(); ++i) {
      const auto it = cache.find(genome_key(genomes[i]));
      if (it != cache.end()) {
        fit[i] = it->second;
      } else {
        missing.push_back(i);
      }
    }
    // Deduplicate so each unseen genome is evaluated exactly once.
    std::vector<std::size_t> unique;
    for (std::size_t i : missing) {
      bool seen = false;
      for (std::size_t j : unique) {
        if (genomes[i] == genomes[j]) { seen = true; break; }
      }
      if (!seen) unique.push_back(i);
    }
    std::vector<double> computed(unique.size(), 0.0);
    parallel_for(unique.size(), config.threads, [&](std::size_t u) {
      computed[u] = fitness(genomes[unique[u]], samples, im, config.fitness_folds,
                            fitness_seed);
    });
    for (std::size_t u = 0; u < unique.size(); ++u) {
      cache[genome_key(genomes[unique[u]])] = computed[u];
    }
    for (std::size_t i : missing) fit[i] = cache.at(genome_key(genomes[i]));
    return fit;
  };

  GaResult result;
  for (int gen = 0; gen < config.generations; ++gen) {
    const std::vector<double> fit = evaluate_population(pop);

    std::size_t best = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      mean += fit[i];
      if (fit[i] > fit[best]) best = i;
    }
    mean /= static_cast<double>(pop.size());
    result.history.push_back({fit[best], mean, pop[best]});

    if (gen + 1 == config.generations) {
      result.best = pop[best];
      result.best_fitness = fit[best];
      break;
    }

    RandomSource rng = root.child(2).child(static_cast<std::uint64_t>(gen));
    std::vector<Genome> next;
    next.reserve(pop.size());
    next.push_back(pop[best]);
    while (next.size() < pop.size()) {
      const Genome a = tournament_pick(pop, fit, config.tournament, rng);
      Genome child = a;
      if (rng.next_unit() < config.crossover_prob) {
        const Genome b = tournament_pick(pop, fit, config.tournament, rng);
        child = crossover(a, b, rng);
      }
      mutate(child, config, rng);
      next.push_back(child);
    }
    pop = std::move(next);
  }
  return result;
}

}  // namespace hdc
