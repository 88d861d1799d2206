#include "hdc/margin_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "hdc/error.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

namespace {

double flip_fraction(double d0) {
  require(d0 >= 0.0 && d0 <= 0.5, "margin sim: d0 must lie in [0, 0.5]");
  return (1.0 - std::sqrt(1.0 - 2.0 * d0)) / 2.0;
}

// Flips k distinct random positions. The pool is any permutation of
// 0..dim-1 and stays one, so it is built once and reused across calls.
void flip_random_positions(Hypervector& hv, int k, std::vector<int>& pool, RandomSource& rng) {
  const std::size_t dim = pool.size();
  for (int j = 0; j < k; ++j) {
    const std::size_t pick =
        static_cast<std::size_t>(j) +
        rng.next_below(static_cast<std::uint64_t>(dim - static_cast<std::size_t>(j)));
    std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    hv.flip_bit(pool[static_cast<std::size_t>(j)]);
  }
}

Hypervector superpose(const Accumulator& acc, SuperpositionRule rule, RandomSource& rng) {
  if (rule == SuperpositionRule::Majority) return acc.bipolarize(rng);
  Hypervector hv(acc.dim());
  const auto counts = acc.counts();
  for (int i = 0; i < acc.dim(); ++i) {
    if (counts[static_cast<std::size_t>(i)] > 0) hv.set_bit(i, true);
  }
  return hv;
}

struct TrialStats {
  double d_retrieve = 0.0;
  double d_wrong = 0.0;
  double margin = 0.0;
};

TrialStats run_trial(int n_classes, int n_contexts, double d0, int dim, ContextMode mode,
                     SuperpositionRule rule, const RandomSource& trial_rng,
                     std::vector<int>& pool) {
  const int flips = static_cast<int>(std::llround(flip_fraction(d0) * dim));

  RandomSource base_rng = trial_rng.child(0);
  const Hypervector base = Hypervector::random(dim, base_rng);

  const RandomSource proto_root = trial_rng.child(1);
  std::vector<Hypervector> protos;
  protos.reserve(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_contexts));
  for (int y = 0; y < n_classes; ++y) {
    for (int p = 0; p < n_contexts; ++p) {
      RandomSource rng =
          proto_root.child(static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(n_contexts) +
                           static_cast<std::uint64_t>(p));
      Hypervector proto = base;
      flip_random_positions(proto, flips, pool, rng);
      protos.push_back(std::move(proto));
    }
  }
  const auto proto_at = [&](int y, int p) -> const Hypervector& {
    return protos[static_cast<std::size_t>(y) * static_cast<std::size_t>(n_contexts) +
                  static_cast<std::size_t>(p)];
  };

  const RandomSource cm_root = trial_rng.child(2);
  std::vector<Hypervector> cms;
  cms.reserve(static_cast<std::size_t>(n_contexts));
  if (mode == ContextMode::Direct) {
    RandomSource rng = cm_root.child(0);
    const Hypervector shared = Hypervector::random(dim, rng);
    cms.assign(static_cast<std::size_t>(n_contexts), shared);
  } else {
    for (int p = 0; p < n_contexts; ++p) {
      RandomSource rng = cm_root.child(static_cast<std::uint64_t>(p));
      cms.push_back(Hypervector::random(dim, rng));
    }
  }

  const RandomSource tie_root = trial_rng.child(3);
  std::vector<Hypervector> supers;
  supers.reserve(static_cast<std::size_t>(n_classes));
  for (int y = 0; y < n_classes; ++y) {
    Accumulator acc(dim);
    for (int p = 0; p < n_contexts; ++p) {
      acc.add(bind(cms[static_cast<std::size_t>(p)], proto_at(y, p)));
    }
    RandomSource tie_rng = tie_root.child(static_cast<std::uint64_t>(y));
    supers.push_back(superpose(acc, rule, tie_rng));
  }

  TrialStats stats;
  for (int c = 0; c < n_contexts; ++c) {
    for (int y = 0; y < n_classes; ++y) {
      const Hypervector query = bind(cms[static_cast<std::size_t>(c)], proto_at(y, c));
      const double d_retrieve = hamming(query, supers[static_cast<std::size_t>(y)]);
      double d_wrong = std::numeric_limits<double>::infinity();
      for (int g = 0; g < n_classes; ++g) {
        if (g == y) continue;
        d_wrong = std::min(d_wrong, hamming(query, supers[static_cast<std::size_t>(g)]));
      }
      stats.d_retrieve += d_retrieve;
      stats.d_wrong += d_wrong;
      const double denom = d_wrong + d_retrieve;
      stats.margin += denom > 0.0 ? (d_wrong - d_retrieve) / denom : 0.0;
    }
  }
  const double pairs = static_cast<double>(n_contexts) * static_cast<double>(n_classes);
  stats.d_retrieve /= pairs;
  stats.d_wrong /= pairs;
  stats.margin /= pairs;
  return stats;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

const char* context_mode_name(ContextMode mode) {
  return mode == ContextMode::Direct ? "direct" : "context";
}

const MarginCell& MarginSweepResult::at(std::size_t context_index, std::size_t d0_index,
                                        ContextMode mode) const {
  const std::size_t idx =
      (context_index * config.d0_grid.size() + d0_index) * 2 +
      (mode == ContextMode::Context ? 1 : 0);
  return cells.at(idx);
}

std::vector<Hypervector> gen_prototypes(int n_classes, int n_contexts, double d0, int dim,
                                        RandomSource& rng) {
  require(n_classes >= 1 && n_contexts >= 1 && dim >= 1, "margin sim: invalid shape");
  const int flips = static_cast<int>(std::llround(flip_fraction(d0) * dim));
  const Hypervector base = Hypervector::random(dim, rng);
  std::vector<int> pool(static_cast<std::size_t>(dim));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<Hypervector> protos;
  protos.reserve(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_contexts));
  for (int i = 0; i < n_classes * n_contexts; ++i) {
    Hypervector proto = base;
    flip_random_positions(proto, flips, pool, rng);
    protos.push_back(std::move(proto));
  }
  return protos;
}

MarginCell run_cell(int n_classes, int n_contexts, double d0, int dim, ContextMode mode,
                    SuperpositionRule rule, int n_trials, const RandomSource& rng) {
  require(n_classes >= 2, "margin sim: need at least two classes");
  require(n_contexts >= 1, "margin sim: need at least one context");
  require(dim >= 1, "margin sim: dim must be positive");
  require(n_trials >= 1, "margin sim: need at least one trial");

  std::vector<int> pool(static_cast<std::size_t>(dim));
  std::iota(pool.begin(), pool.end(), 0);

  std::vector<double> retrieves;
  std::vector<double> wrongs;
  std::vector<double> margins;
  retrieves.reserve(static_cast<std::size_t>(n_trials));
  wrongs.reserve(static_cast<std::size_t>(n_trials));
  margins.reserve(static_cast<std::size_t>(n_trials));
  for (int t = 0; t < n_trials; ++t) {
    const TrialStats stats = run_trial(n_classes, n_contexts, d0, dim, mode, rule,
                                       rng.child(static_cast<std::uint64_t>(t)), pool);
    retrieves.push_back(stats.d_retrieve);
    wrongs.push_back(stats.d_wrong);
    margins.push_back(stats.margin);
  }

  MarginCell cell;
  cell.n_contexts = n_contexts;
  cell.d0 = d0;
  cell.mode = mode;
  cell.d_retrieve = mean_of(retrieves);
  cell.d_wrong = mean_of(wrongs);
  cell.margin = mean_of(margins);
  cell.d_retrieve_stderr = stderr_of(retrieves, cell.d_retrieve);
  cell.d_wrong_stderr = stderr_of(wrongs, cell.d_wrong);
  cell.margin_stderr = stderr_of(margins, cell.margin);
  return cell;
}

MarginSweepResult sweep(const MarginSimConfig& config) {
  require(config.dim >= 1, "margin sim: dim must be positive");
  require(config.n_classes >= 2, "margin sim: need at least two classes");
  require(config.n_trials >= 1, "margin sim: need at least one trial");
  require(!config.context_counts.empty(), "margin sim: empty context count list");
  require(!config.d0_grid.empty(), "margin sim: empty d0 grid");
  for (int n : config.context_counts) {
    require(n >= 1 && n % 2 == 1, "margin sim: context counts must be odd");
  }
  for (double d0 : config.d0_grid) {
    require(d0 >= 0.0 && d0 <= 0.5, "margin sim: d0 must lie in [0, 0.5]");
  }

  MarginSweepResult result;
  result.config = config;
  const std::size_t n_cells = config.context_counts.size() * config.d0_grid.size() * 2;
  result.cells.resize(n_cells);

  const RandomSource root(config.seed);
  parallel_for(n_cells, config.threads, [&](std::size_t idx) {
    const std::size_t mode_idx = idx % 2;
    const std::size_t d0_idx = (idx / 2) % config.d0_grid.size();
    const std::size_t ctx_idx = idx / 2 / config.d0_grid.size();
    const ContextMode mode = mode_idx == 0 ? ContextMode::Direct : ContextMode::Context;
    result.cells[idx] = run_cell(config.n_classes, config.context_counts[ctx_idx],
                                 config.d0_grid[d0_idx], config.dim, mode,
                                 config.superposition, config.n_trials, root.child(idx));
  });
  return result;
}

std::string margin_csv(const MarginSweepResult& result) {
  std::string out = "n_contexts,d0,mode,d_retrieve,d_wrong,margin,stderr\n";
  char line[256];
  for (const MarginCell& cell : result.cells) {
    std::snprintf(line, sizeof(line), "%d,%.6g,%s,%.9f,%.9f,%.9f,%.9f\n", cell.n_contexts,
                  cell.d0, context_mode_name(cell.mode), cell.d_retrieve, cell.d_wrong,
                  cell.margin, cell.margin_stderr);
    out += line;
  }
  return out;
}

}  // namespace hdc
