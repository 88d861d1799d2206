#include <doctest.h>

#include <vector>

#include "hdc/architectures.hpp"
#include "hdc/dataset.hpp"
#include "hdc/error.hpp"
#include "hdc/ga.hpp"
#include "hdc/random.hpp"

using hdc::ContractViolation;
using hdc::GaConfig;
using hdc::GaResult;
using hdc::Genome;
using hdc::ItemMemory;

namespace {

struct Fixture {
  ItemMemory im;
  std::vector<hdc::EncodedSample> samples;

  Fixture() {
    hdc::GenConfig cfg;
    cfg.n_gestures = 4;
    cfg.n_positions = 3;
    cfg.n_reps = 2;
    cfg.windows_per_rep = 7;
    cfg.n_channels = 8;
    cfg.paired_positions = {};
    cfg.seed = 31;
    const hdc::Dataset ds = hdc::generate(cfg);
    im = hdc::build_model_item_memory(32, cfg.n_channels, 1000);
    samples = hdc::encode_stream(ds.windows, im, hdc::encode_rng(32)).samples;
  }
};

GaConfig tiny_config() {
  GaConfig cfg;
  cfg.population = 4;
  cfg.generations = 3;
  cfg.tournament = 2;
  cfg.fitness_folds = 2;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("genome clamping and conversion") {
  Genome g;
  g.levels = {1, 70, 16};
  g.d_max = {-0.5, 1.5, 0.25};
  const Genome c = hdc::clamp_genome(g);
  CHECK(c.levels == std::array<int, 3>{2, 64, 16});
  CHECK(c.d_max == std::array<double, 3>{0.0, 1.0, 0.25});

  const auto params = c.to_cim_params();
  CHECK(params[0].levels == 2);
  CHECK(params[0].d_max == 0.0);
  CHECK(params[1].levels == 64);
  CHECK(params[1].d_max == 1.0);
  CHECK(params[2].levels == 16);
  CHECK(params[2].d_max == 0.25);

  const Genome def;
  CHECK(hdc::clamp_genome(def) == def);
}

TEST_CASE("fitness is deterministic and validated") {
  const Fixture fx;
  const Genome def;
  const double f1 = hdc::fitness(def, fx.samples, fx.im, 2, 5);
  const double f2 = hdc::fitness(def, fx.samples, fx.im, 2, 5);
  CHECK(f1 == f2);
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);

  Genome bad;
  bad.levels = {0, 16, 16};
  CHECK_THROWS_AS(hdc::fitness(bad, fx.samples, fx.im, 2, 5), ContractViolation);
  CHECK_THROWS_AS(hdc::fitness(def, {}, fx.im, 2, 5), ContractViolation);
}

TEST_CASE("optimization is elitist, monotone and reproducible") {
  const Fixture fx;
  const GaConfig cfg = tiny_config();
  const GaResult res = hdc::optimize(fx.samples, fx.im, cfg);

  REQUIRE(res.history.size() == 3);
  for (std::size_t g = 1; g < res.history.size(); ++g) {
    CHECK(res.history[g].best_fitness >= res.history[g - 1].best_fitness);
    CHECK(res.history[g].mean_fitness <= res.history[g].best_fitness);
  }
  CHECK(res.best_fitness == res.history.back().best_fitness);
  CHECK(res.best == res.history.back().best_genome);
  CHECK(res.best_fitness >= res.history.front().best_fitness);

  for (const auto& stats : res.history) {
    CHECK(hdc::clamp_genome(stats.best_genome) == stats.best_genome);
  }

  // individual 0 of the initial population is the default genome, so the
  // final best is at least as fit (fitness seed as optimize derives it)
  const std::uint64_t fitness_seed = hdc::RandomSource(cfg.seed).child(3).seed();
  const double baseline =
      hdc::fitness(Genome{}, fx.samples, fx.im, cfg.fitness_folds, fitness_seed);
  CHECK(res.best_fitness >= baseline);

  const GaResult rerun = hdc::optimize(fx.samples, fx.im, cfg);
  CHECK(rerun.best == res.best);
  CHECK(rerun.best_fitness == res.best_fitness);
  REQUIRE(rerun.history.size() == res.history.size());
  for (std::size_t g = 0; g < res.history.size(); ++g) {
    CHECK(rerun.history[g].best_fitness == res.history[g].best_fitness);
    CHECK(rerun.history[g].mean_fitness == res.history[g].mean_fitness);
    CHECK(rerun.history[g].best_genome == res.history[g].best_genome);
  }
}

TEST_CASE("optimize validates its configuration") {
  const Fixture fx;

  GaConfig cfg = tiny_config();
  cfg.population = 1;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);

  cfg = tiny_config();
  cfg.generations = 0;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);

  cfg = tiny_config();
  cfg.fitness_folds = 1;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);

  cfg = tiny_config();
  cfg.tournament = 0;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);

  cfg = tiny_config();
  cfg.crossover_prob = 1.5;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);

  cfg = tiny_config();
  cfg.mutation_prob = -0.1;
  CHECK_THROWS_AS(hdc::optimize(fx.samples, fx.im, cfg), ContractViolation);
}
