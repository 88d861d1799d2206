#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdc/architectures.hpp"
#include "hdc/dataset.hpp"
#include "hdc/error.hpp"
#include "hdc/ga.hpp"
#include "hdc/margin_sim.hpp"
#include "hdc/model_io.hpp"
#include "hdc/parallel.hpp"

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int resolve_threads(int flag_value) {
  return flag_value > 0 ? flag_value : hdc::default_thread_count();
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("--config: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: " + path + " must hold a JSON object");
  return j;
}

void check_fields(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& scope) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) throw UsageError("--config: unknown field '" + scope + item.key() + "'");
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw hdc::DataError(hdc::DataError::Kind::Io, "cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw hdc::DataError(hdc::DataError::Kind::Io, "failed writing " + path);
}

// Machine-readable output goes to --out when given, to stdout otherwise.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    write_text(out_path, text);
  }
}

hdc::Architecture parse_arch(const std::string& name) {
  const auto arch = hdc::architecture_from_name(name);
  if (!arch) {
    throw UsageError("--arch: unknown architecture '" + name +
                     "' (expected direct, dual, ctx-ortho or ctx-cim)");
  }
  return *arch;
}

json gen_config_to_json(const hdc::GenConfig& c) {
  json pairs = json::array();
  for (const auto& [a, b] : c.paired_positions) pairs.push_back({a, b});
  return {
      {"n_gestures", c.n_gestures},
      {"n_positions", c.n_positions},
      {"n_reps", c.n_reps},
      {"windows_per_rep", c.windows_per_rep},
      {"n_channels", c.n_channels},
      {"emg_noise_sigma", c.emg_noise_sigma},
      {"position_distortion", c.position_distortion},
      {"accel_noise_sigma", c.accel_noise_sigma},
      {"paired_positions", pairs},
      {"seed", c.seed},
  };
}

hdc::GenConfig gen_config_from_json(const json& j) {
  check_fields(j,
               {"n_gestures", "n_positions", "n_reps", "windows_per_rep", "n_channels",
                "emg_noise_sigma", "position_distortion", "accel_noise_sigma",
                "paired_positions", "seed"},
               "");
  hdc::GenConfig c;
  c.n_gestures = j.value("n_gestures", c.n_gestures);
  c.n_positions = j.value("n_positions", c.n_positions);
  c.n_reps = j.value("n_reps", c.n_reps);
  c.windows_per_rep = j.value("windows_per_rep", c.windows_per_rep);
  c.n_channels = j.value("n_channels", c.n_channels);
  c.emg_noise_sigma = j.value("emg_noise_sigma", c.emg_noise_sigma);
  c.position_distortion = j.value("position_distortion", c.position_distortion);
  c.accel_noise_sigma = j.value("accel_noise_sigma", c.accel_noise_sigma);
  c.seed = j.value("seed", c.seed);
  if (j.contains("paired_positions")) {
    c.paired_positions.clear();
    for (const auto& pair : j.at("paired_positions")) {
      c.paired_positions.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
  }
  return c;
}

json cim_params_to_json(const std::array<hdc::CimParams, 3>& params) {
  json out = json::array();
  for (const auto& p : params) out.push_back({{"levels", p.levels}, {"d_max", p.d_max}});
  return out;
}

std::array<hdc::CimParams, 3> cim_params_from_json(const json& j) {
  std::array<hdc::CimParams, 3> out = hdc::TrainConfig{}.cim_params;
  if (j.size() != 3) throw UsageError("--config: 'cim' must list exactly three axes");
  for (std::size_t axis = 0; axis < 3; ++axis) {
    check_fields(j.at(axis), {"levels", "d_max"}, "cim.");
    out[axis].levels = j.at(axis).value("levels", out[axis].levels);
    out[axis].d_max = j.at(axis).value("d_max", out[axis].d_max);
  }
  return out;
}

json train_config_to_json(const hdc::TrainConfig& c) {
  return {
      {"dim", c.dim},
      {"position",
       {{"epochs", c.position.epochs},
        {"l2", c.position.l2},
        {"lr0", c.position.lr0},
        {"lr_decay", c.position.lr_decay},
        {"batches", c.position.batches},
        {"warm_frac", c.position.warm_frac}}},
      {"cim", cim_params_to_json(c.cim_params)},
  };
}

hdc::TrainConfig train_config_from_json(const json& j) {
  check_fields(j, {"dim", "position", "cim"}, "");
  hdc::TrainConfig c;
  c.dim = j.value("dim", c.dim);
  if (j.contains("position")) {
    const json& p = j.at("position");
    check_fields(p, {"epochs", "l2", "lr0", "lr_decay", "batches", "warm_frac"}, "position.");
    c.position.epochs = p.value("epochs", c.position.epochs);
    c.position.l2 = p.value("l2", c.position.l2);
    c.position.lr0 = p.value("lr0", c.position.lr0);
    c.position.lr_decay = p.value("lr_decay", c.position.lr_decay);
    c.position.batches = p.value("batches", c.position.batches);
    c.position.warm_frac = p.value("warm_frac", c.position.warm_frac);
  }
  if (j.contains("cim")) c.cim_params = cim_params_from_json(j.at("cim"));
  return c;
}

json eval_report_to_json(const hdc::EvalReport& r) {
  json per_position = json::array();
  for (std::size_t p = 0; p < r.position_ids.size(); ++p) {
    per_position.push_back({{"position", r.position_ids[p]},
                            {"accuracy", r.per_position_accuracy[p]},
                            {"count", r.per_position_counts[p]}});
  }
  json out = {
      {"n_samples", r.n_samples},
      {"overall_accuracy", r.overall_accuracy},
      {"per_position", per_position},
      {"gesture_ids", r.gesture_ids},
      {"confusion", r.confusion},
      {"mean_true_class_distance", r.mean_true_class_distance},
      {"mean_wrong_class_distance", r.mean_wrong_class_distance},
      {"mean_margin", r.mean_margin},
  };
  if (!r.fold_accuracies.empty()) out["fold_accuracies"] = r.fold_accuracies;
  return out;
}

json footprint_to_json(const hdc::FootprintReport& f) {
  json out = {
      {"n_ams", f.n_ams},
      {"n_classes", f.n_classes},
      {"dim", f.dim},
      {"prototype_bits", f.prototype_bits},
      {"position_model_bits", f.position_model_bits},
      {"total_bits", f.total_bits},
  };
  if (f.memories_counted) {
    out["item_memory_bits"] = f.item_memory_bits;
    out["context_memory_bits"] = f.context_memory_bits;
    out["cim_bits"] = f.cim_bits;
    out["total_with_memories"] = f.total_with_memories;
  }
  return out;
}

json genome_to_json(const hdc::Genome& g) {
  return {{"levels", g.levels}, {"d_max", g.d_max}};
}

// Encodes a dataset with the item memory and tie-break stream that belong to
// the given master seed.
hdc::EncodeResult encode_dataset(const hdc::Dataset& ds, const hdc::ItemMemory& im,
                                 std::uint64_t master_seed, int threads) {
  return hdc::encode_stream(ds.windows, im, hdc::encode_rng(master_seed), threads);
}

int dataset_channels(const hdc::Dataset& ds) {
  if (ds.windows.empty()) {
    throw hdc::DataError(hdc::DataError::Kind::MalformedFile, "dataset holds no windows");
  }
  return static_cast<int>(ds.windows.front().mav.size());
}

// ---------------------------------------------------------------------------
// datagen

struct DatagenParams {
  std::uint64_t seed = hdc::GenConfig{}.seed;
  std::string out = "dataset.tsv";
  std::string config_path;
};

void run_datagen(const DatagenParams& p, bool seed_given) {
  hdc::GenConfig config = gen_config_from_json(load_config_file(p.config_path));
  if (seed_given) config.seed = p.seed;
  const hdc::Dataset ds = hdc::generate(config);
  hdc::save(ds, p.out);
  std::fprintf(stderr, "datagen: wrote %zu windows (%d gestures x %d positions x %d reps) to %s\n",
              ds.windows.size(), config.n_gestures, config.n_positions, config.n_reps,
              p.out.c_str());
}

// ---------------------------------------------------------------------------
// train

struct TrainParams {
  std::string arch;
  std::string dataset;
  std::string model = "model.hdcm";
  std::string out;
  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 0;
};

void run_train(const TrainParams& p) {
  const hdc::Architecture arch = parse_arch(p.arch);
  const hdc::TrainConfig tc = train_config_from_json(load_config_file(p.config_path));
  const hdc::Dataset ds = hdc::load(p.dataset);
  const int threads = resolve_threads(p.threads);

  const hdc::ItemMemory im = hdc::build_model_item_memory(p.seed, dataset_channels(ds), tc.dim);
  const hdc::EncodeResult enc = encode_dataset(ds, im, p.seed, threads);
  const hdc::Model model = hdc::train(arch, enc.samples, im, tc, p.seed);
  hdc::save_model(model, p.model);

  const hdc::FootprintReport fp = hdc::footprint_bits(model);
  std::fprintf(stderr, "train: arch=%s dim=%d samples=%zu gestures=%zu positions=%zu -> %s (%lld bits)\n",
              hdc::architecture_name(arch), model.dim, enc.samples.size(),
              model.gesture_ids.size(), model.position_ids.size(), p.model.c_str(),
              static_cast<long long>(fp.total_bits));

  if (!p.out.empty()) {
    const json report = {
        {"command", "train"},
        {"config",
         {{"arch", hdc::architecture_name(arch)},
          {"dataset", p.dataset},
          {"model", p.model},
          {"seed", p.seed},
          {"train", train_config_to_json(tc)}}},
        {"result",
         {{"n_windows", ds.windows.size()},
          {"n_samples", enc.samples.size()},
          {"skipped_short_groups", enc.skipped_short_groups},
          {"gesture_ids", model.gesture_ids},
          {"position_ids", model.position_ids},
          {"footprint", footprint_to_json(fp)}}},
    };
    emit(p.out, report.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalParams {
  std::string model;
  std::string dataset;
  std::string out;
  int threads = 0;
};

void run_eval(const EvalParams& p) {
  const hdc::Model model = hdc::load_model(p.model);
  hdc::require(model.item_memory.size() > 0,
               "eval: model carries no item memory and cannot encode raw windows");
  const hdc::Dataset ds = hdc::load(p.dataset);
  const hdc::EncodeResult enc =
      encode_dataset(ds, model.item_memory, model.master_seed, resolve_threads(p.threads));
  const hdc::EvalReport report = hdc::evaluate(model, enc.samples);

  std::fprintf(stderr, "eval: arch=%s accuracy=%.4f on %zu samples\n",
              hdc::architecture_name(model.architecture), report.overall_accuracy,
              report.n_samples);

  const json out = {
      {"command", "eval"},
      {"config",
       {{"model", p.model},
        {"dataset", p.dataset},
        {"arch", hdc::architecture_name(model.architecture)},
        {"dim", model.dim},
        {"seed", model.master_seed}}},
      {"result", eval_report_to_json(report)},
  };
  emit(p.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// crossval

struct CrossvalParams {
  std::string arch;
  std::string dataset;
  std::string out;
  std::string config_path;
  std::string granularity = "sample";
  std::uint64_t seed = 1;
  int folds = 10;
  int threads = 0;
};

void run_crossval(const CrossvalParams& p) {
  const hdc::Architecture arch = parse_arch(p.arch);
  hdc::CrossValConfig cv;
  cv.train = train_config_from_json(load_config_file(p.config_path));
  cv.folds = p.folds;
  cv.seed = p.seed;
  cv.threads = resolve_threads(p.threads);
  cv.granularity = p.granularity == "repetition" ? hdc::FoldGranularity::Repetition
                                                 : hdc::FoldGranularity::Sample;

  const hdc::Dataset ds = hdc::load(p.dataset);
  const hdc::ItemMemory im =
      hdc::build_model_item_memory(p.seed, dataset_channels(ds), cv.train.dim);
  const hdc::EncodeResult enc = encode_dataset(ds, im, p.seed, cv.threads);
  const hdc::EvalReport report = hdc::cross_validate(arch, enc.samples, im, cv);

  std::fprintf(stderr, "crossval: arch=%s folds=%d samples=%zu accuracy=%.4f\n",
              hdc::architecture_name(arch), p.folds, report.n_samples,
              report.overall_accuracy);

  const json out = {
      {"command", "crossval"},
      {"config",
       {{"arch", hdc::architecture_name(arch)},
        {"dataset", p.dataset},
        {"folds", p.folds},
        {"seed", p.seed},
        {"granularity", p.granularity},
        {"train", train_config_to_json(cv.train)}}},
      {"result", eval_report_to_json(report)},
  };
  emit(p.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// margin-sim

struct MarginParams {
  std::string out;
  std::string config_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int trials = 0;  // 0: keep config default
  int threads = 0;
};

hdc::MarginSimConfig margin_config_from_json(const json& j) {
  check_fields(j,
               {"dim", "n_classes", "context_counts", "d0_grid", "n_trials", "seed",
                "superposition"},
               "");
  hdc::MarginSimConfig c;
  c.dim = j.value("dim", c.dim);
  c.n_classes = j.value("n_classes", c.n_classes);
  if (j.contains("context_counts")) {
    c.context_counts = j.at("context_counts").get<std::vector<int>>();
  }
  if (j.contains("d0_grid")) c.d0_grid = j.at("d0_grid").get<std::vector<double>>();
  c.n_trials = j.value("n_trials", c.n_trials);
  c.seed = j.value("seed", c.seed);
  const std::string rule = j.value("superposition", std::string("majority"));
  if (rule == "majority") {
    c.superposition = hdc::SuperpositionRule::Majority;
  } else if (rule == "intsum") {
    c.superposition = hdc::SuperpositionRule::IntSum;
  } else {
    throw UsageError("--config: field 'superposition' must be 'majority' or 'intsum'");
  }
  return c;
}

json margin_config_to_json(const hdc::MarginSimConfig& c) {
  return {
      {"dim", c.dim},
      {"n_classes", c.n_classes},
      {"context_counts", c.context_counts},
      {"d0_grid", c.d0_grid},
      {"n_trials", c.n_trials},
      {"seed", c.seed},
      {"superposition",
       c.superposition == hdc::SuperpositionRule::Majority ? "majority" : "intsum"},
  };
}

void run_margin(const MarginParams& p, bool seed_given) {
  hdc::MarginSimConfig config = margin_config_from_json(load_config_file(p.config_path));
  if (seed_given) config.seed = p.seed;
  if (p.trials > 0) config.n_trials = p.trials;
  config.threads = resolve_threads(p.threads);

  const hdc::MarginSweepResult result = hdc::sweep(config);

  double best_improvement = 0.0;
  int best_contexts = 0;
  double best_d0 = 0.0;
  for (std::size_t c = 0; c < config.context_counts.size(); ++c) {
    for (std::size_t d = 0; d < config.d0_grid.size(); ++d) {
      const double dm = result.at(c, d, hdc::ContextMode::Context).margin -
                        result.at(c, d, hdc::ContextMode::Direct).margin;
      if (dm > best_improvement) {
        best_improvement = dm;
        best_contexts = config.context_counts[c];
        best_d0 = config.d0_grid[d];
      }
    }
  }
  std::fprintf(stderr, "margin-sim: %zu cells, max margin improvement %.4f at %d contexts, d0=%.2f\n",
              result.cells.size(), best_improvement, best_contexts, best_d0);

  if (p.format == "csv") {
    emit(p.out, hdc::margin_csv(result));
  } else {
    json cells = json::array();
    for (const hdc::MarginCell& cell : result.cells) {
      cells.push_back({{"n_contexts", cell.n_contexts},
                       {"d0", cell.d0},
                       {"mode", hdc::context_mode_name(cell.mode)},
                       {"d_retrieve", cell.d_retrieve},
                       {"d_wrong", cell.d_wrong},
                       {"margin", cell.margin},
                       {"d_retrieve_stderr", cell.d_retrieve_stderr},
                       {"d_wrong_stderr", cell.d_wrong_stderr},
                       {"margin_stderr", cell.margin_stderr}});
    }
    const json out = {{"command", "margin-sim"},
                      {"config", margin_config_to_json(config)},
                      {"result", cells}};
    emit(p.out, out.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// ga

struct GaParams {
  std::string dataset;
  std::string out;
  std::string config_path;
  std::uint64_t seed = 0;
  int folds = 0;  // 0: keep config default
  int threads = 0;
};

void run_ga(const GaParams& p, bool seed_given) {
  const json j = load_config_file(p.config_path);
  check_fields(j,
               {"population", "generations", "tournament", "crossover_prob", "mutation_prob",
                "mutation_scale_levels", "mutation_scale_dmax", "fitness_folds", "seed",
                "dim"},
               "");
  hdc::GaConfig config;
  config.population = j.value("population", config.population);
  config.generations = j.value("generations", config.generations);
  config.tournament = j.value("tournament", config.tournament);
  config.crossover_prob = j.value("crossover_prob", config.crossover_prob);
  config.mutation_prob = j.value("mutation_prob", config.mutation_prob);
  config.mutation_scale_levels = j.value("mutation_scale_levels", config.mutation_scale_levels);
  config.mutation_scale_dmax = j.value("mutation_scale_dmax", config.mutation_scale_dmax);
  config.fitness_folds = j.value("fitness_folds", config.fitness_folds);
  config.seed = j.value("seed", config.seed);
  const int dim = j.value("dim", hdc::Hypervector::kDefaultDim);
  if (seed_given) config.seed = p.seed;
  if (p.folds > 0) config.fitness_folds = p.folds;
  config.threads = resolve_threads(p.threads);

  const hdc::Dataset ds = hdc::load(p.dataset);
  const hdc::ItemMemory im =
      hdc::build_model_item_memory(config.seed, dataset_channels(ds), dim);
  const hdc::EncodeResult enc = encode_dataset(ds, im, config.seed, config.threads);
  const hdc::GaResult result = hdc::optimize(enc.samples, im, config);

  std::fprintf(stderr, "ga: best fitness %.4f, levels=[%d,%d,%d], d_max=[%.3f,%.3f,%.3f]\n",
              result.best_fitness, result.best.levels[0], result.best.levels[1],
              result.best.levels[2], result.best.d_max[0], result.best.d_max[1],
              result.best.d_max[2]);

  json history = json::array();
  for (const hdc::GaGenerationStats& g : result.history) {
    history.push_back({{"best_fitness", g.best_fitness},
                       {"mean_fitness", g.mean_fitness},
                       {"best_genome", genome_to_json(g.best_genome)}});
  }
  const json out = {
      {"command", "ga"},
      {"config",
       {{"dataset", p.dataset},
        {"population", config.population},
        {"generations", config.generations},
        {"tournament", config.tournament},
        {"crossover_prob", config.crossover_prob},
        {"mutation_prob", config.mutation_prob},
        {"mutation_scale_levels", config.mutation_scale_levels},
        {"mutation_scale_dmax", config.mutation_scale_dmax},
        {"fitness_folds", config.fitness_folds},
        {"seed", config.seed},
        {"dim", dim}}},
      {"result",
       {{"best", genome_to_json(result.best)},
        {"best_fitness", result.best_fitness},
        {"history", history}}},
  };
  emit(p.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// footprint

struct FootprintParams {
  std::string model;
  std::string out;
  bool count_memories = false;
};

void run_footprint(const FootprintParams& p) {
  const hdc::Model model = hdc::load_model(p.model);
  const hdc::FootprintReport fp = hdc::footprint_bits(model, p.count_memories);
  std::fprintf(stderr, "footprint: arch=%s %lld bits (%d memories x %d classes x %d bits",
              hdc::architecture_name(model.architecture),
              static_cast<long long>(fp.total_bits), fp.n_ams, fp.n_classes, fp.dim);
  if (fp.position_model_bits > 0) {
    std::fprintf(stderr, " + %lld position-model bits", static_cast<long long>(fp.position_model_bits));
  }
  std::fprintf(stderr, ")\n");
  if (fp.memories_counted) {
    std::fprintf(stderr, "footprint: %lld bits including regenerable memories\n",
                static_cast<long long>(fp.total_with_memories));
  }
  const json out = {
      {"command", "footprint"},
      {"config", {{"model", p.model}, {"count_memories", p.count_memories}}},
      {"result", footprint_to_json(fp)},
  };
  emit(p.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// context-matrix

struct ContextMatrixParams {
  std::string dataset;
  std::string model;
  std::string out;
  std::string config_path;
  std::string format = "json";
  std::uint64_t seed = 0;
};

// Span-mean accelerometer samples without the (unneeded) EMG encoding.
std::vector<hdc::EncodedSample> accel_span_samples(const std::vector<hdc::FeatureWindow>& windows) {
  std::vector<hdc::EncodedSample> samples;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= windows.size(); ++i) {
    const bool boundary = i == windows.size() ||
                          windows[i].position != windows[start].position ||
                          windows[i].gesture != windows[start].gesture ||
                          windows[i].repetition != windows[start].repetition;
    if (!boundary) continue;
    const std::size_t count = i - start;
    for (std::size_t s = 0; s + hdc::kTemporalSpan <= count; ++s) {
      hdc::EncodedSample sample;
      sample.gesture = windows[start].gesture;
      sample.position = windows[start].position;
      sample.repetition = windows[start].repetition;
      for (int axis = 0; axis < 3; ++axis) {
        double sum = 0.0;
        for (int k = 0; k < hdc::kTemporalSpan; ++k) {
          sum += windows[start + s + static_cast<std::size_t>(k)]
                     .accel[static_cast<std::size_t>(axis)];
        }
        sample.accel_mean[static_cast<std::size_t>(axis)] = sum / hdc::kTemporalSpan;
      }
      samples.push_back(std::move(sample));
    }
    start = i;
  }
  return samples;
}

void run_context_matrix(const ContextMatrixParams& p) {
  const json j = load_config_file(p.config_path);
  check_fields(j, {"dim", "cim"}, "");

  std::array<hdc::CimParams, 3> cim_params = hdc::TrainConfig{}.cim_params;
  int dim = j.value("dim", hdc::Hypervector::kDefaultDim);
  std::uint64_t seed = p.seed;
  std::array<hdc::ContinuousItemMemory, 3> cims;
  if (!p.model.empty()) {
    const hdc::Model model = hdc::load_model(p.model);
    hdc::require(model.cims.has_value(),
                 "context-matrix: model has no continuous item memories");
    cims = *model.cims;
    cim_params = model.cim_params;
    dim = model.dim;
  } else {
    if (j.contains("cim")) cim_params = cim_params_from_json(j.at("cim"));
    const hdc::RandomSource root(seed);
    for (int axis = 0; axis < 3; ++axis) {
      cims[static_cast<std::size_t>(axis)] = hdc::ContinuousItemMemory::build(
          cim_params[static_cast<std::size_t>(axis)], dim,
          root.child(hdc::seed_key::kCim).child(static_cast<std::uint64_t>(axis)).seed());
    }
  }

  const hdc::Dataset ds = hdc::load(p.dataset);
  const std::vector<hdc::EncodedSample> samples = accel_span_samples(ds.windows);
  const hdc::ContextMatrix matrix = hdc::context_distance_matrix(samples, cims, seed);

  std::fprintf(stderr, "context-matrix: %zu positions\n", matrix.position_ids.size());
  for (std::size_t i = 0; i < matrix.position_ids.size(); ++i) {
    std::fprintf(stderr, "  p%-2d", matrix.position_ids[i]);
    for (std::size_t k = 0; k < matrix.position_ids.size(); ++k) {
      std::fprintf(stderr, " %.3f", matrix.distances[i][k]);
    }
    std::fprintf(stderr, "\n");
  }

  if (p.format == "csv") {
    std::ostringstream csv;
    csv << "position";
    for (int id : matrix.position_ids) csv << ",p" << id;
    csv << "\n";
    char cell[32];
    for (std::size_t i = 0; i < matrix.position_ids.size(); ++i) {
      csv << "p" << matrix.position_ids[i];
      for (std::size_t k = 0; k < matrix.position_ids.size(); ++k) {
        std::snprintf(cell, sizeof(cell), ",%.9f", matrix.distances[i][k]);
        csv << cell;
      }
      csv << "\n";
    }
    emit(p.out, csv.str());
  } else {
    const json out = {
        {"command", "context-matrix"},
        {"config",
         {{"dataset", p.dataset},
          {"model", p.model},
          {"seed", seed},
          {"dim", dim},
          {"cim", cim_params_to_json(cim_params)}}},
        {"result",
         {{"position_ids", matrix.position_ids}, {"distances", matrix.distances}}},
    };
    emit(p.out, out.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// update

struct UpdateParams {
  std::string model;
  std::string dataset;
  std::string model_out;
  std::string out;
  int threads = 0;
};

void run_update(const UpdateParams& p) {
  const hdc::Model model = hdc::load_model(p.model);
  hdc::require(model.item_memory.size() > 0,
               "update: model carries no item memory and cannot encode raw windows");
  const hdc::Dataset ds = hdc::load(p.dataset);
  const hdc::EncodeResult enc =
      encode_dataset(ds, model.item_memory, model.master_seed, resolve_threads(p.threads));
  const hdc::Model updated = hdc::update(model, enc.samples);
  const std::string target = p.model_out.empty() ? p.model : p.model_out;
  hdc::save_model(updated, target);

  std::fprintf(stderr, "update: superposed %zu samples into %s\n", enc.samples.size(), target.c_str());
  if (!p.out.empty()) {
    const json out = {
        {"command", "update"},
        {"config", {{"model", p.model}, {"dataset", p.dataset}, {"model_out", target}}},
        {"result",
         {{"n_samples", enc.samples.size()},
          {"n_added_total", [&] {
             std::int64_t total = 0;
             for (const hdc::AssociativeMemory& am : updated.ams) {
               for (int c = 0; c < am.n_classes(); ++c) total += am.accumulator(c).n_added();
             }
             return total;
           }()}}},
    };
    emit(p.out, out.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperdimensional gesture classification toolkit"};
  app.require_subcommand(1);

  DatagenParams datagen;
  auto* sc_datagen = app.add_subcommand("datagen", "Generate a synthetic dataset");
  sc_datagen->add_option("--seed", datagen.seed, "Generator seed");
  sc_datagen->add_option("--out", datagen.out, "Dataset path")->capture_default_str();
  sc_datagen->add_option("--config", datagen.config_path, "JSON generator config");
  sc_datagen->callback([&] { run_datagen(datagen, sc_datagen->count("--seed") > 0); });

  TrainParams train;
  auto* sc_train = app.add_subcommand("train", "Train a model on a dataset");
  sc_train->add_option("--arch", train.arch, "direct | dual | ctx-ortho | ctx-cim")->required();
  sc_train->add_option("--dataset", train.dataset, "Dataset path")->required();
  sc_train->add_option("--model", train.model, "Output model path")->capture_default_str();
  sc_train->add_option("--out", train.out, "JSON report path");
  sc_train->add_option("--config", train.config_path, "JSON training config");
  sc_train->add_option("--seed", train.seed, "Master seed")->capture_default_str();
  sc_train->add_option("--threads", train.threads, "Worker threads (0 = auto)");
  sc_train->callback([&] { run_train(train); });

  EvalParams eval;
  auto* sc_eval = app.add_subcommand("eval", "Evaluate a model on a dataset");
  sc_eval->add_option("--model", eval.model, "Model path")->required();
  sc_eval->add_option("--dataset", eval.dataset, "Dataset path")->required();
  sc_eval->add_option("--out", eval.out, "JSON report path");
  sc_eval->add_option("--threads", eval.threads, "Worker threads (0 = auto)");
  sc_eval->callback([&] { run_eval(eval); });

  CrossvalParams crossval;
  auto* sc_crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  sc_crossval->add_option("--arch", crossval.arch, "direct | dual | ctx-ortho | ctx-cim")
      ->required();
  sc_crossval->add_option("--dataset", crossval.dataset, "Dataset path")->required();
  sc_crossval->add_option("--folds", crossval.folds, "Fold count")->capture_default_str();
  sc_crossval->add_option("--seed", crossval.seed, "Master seed")->capture_default_str();
  sc_crossval->add_option("--granularity", crossval.granularity, "sample | repetition")
      ->check(CLI::IsMember({"sample", "repetition"}))
      ->capture_default_str();
  sc_crossval->add_option("--out", crossval.out, "JSON report path");
  sc_crossval->add_option("--config", crossval.config_path, "JSON training config");
  sc_crossval->add_option("--threads", crossval.threads, "Worker threads (0 = auto)");
  sc_crossval->callback([&] { run_crossval(crossval); });

  MarginParams margin;
  auto* sc_margin = app.add_subcommand("margin-sim", "Classification-margin simulation sweep");
  sc_margin->add_option("--seed", margin.seed, "Simulation seed");
  sc_margin->add_option("--trials", margin.trials, "Trials per grid cell");
  sc_margin->add_option("--out", margin.out, "Output path");
  sc_margin->add_option("--format", margin.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sc_margin->add_option("--config", margin.config_path, "JSON sweep config");
  sc_margin->add_option("--threads", margin.threads, "Worker threads (0 = auto)");
  sc_margin->callback([&] { run_margin(margin, sc_margin->count("--seed") > 0); });

  GaParams ga;
  auto* sc_ga = app.add_subcommand("ga", "Tune CIM parameters with a genetic algorithm");
  sc_ga->add_option("--dataset", ga.dataset, "Dataset path")->required();
  sc_ga->add_option("--seed", ga.seed, "GA seed");
  sc_ga->add_option("--folds", ga.folds, "Fitness cross-validation folds");
  sc_ga->add_option("--out", ga.out, "JSON report path");
  sc_ga->add_option("--config", ga.config_path, "JSON GA config");
  sc_ga->add_option("--threads", ga.threads, "Worker threads (0 = auto)");
  sc_ga->callback([&] { run_ga(ga, sc_ga->count("--seed") > 0); });

  FootprintParams footprint;
  auto* sc_footprint = app.add_subcommand("footprint", "Report model parameter bits");
  sc_footprint->add_option("--model", footprint.model, "Model path")->required();
  sc_footprint->add_flag("--count-memories", footprint.count_memories,
                         "Also count seed-regenerable memories");
  sc_footprint->add_option("--out", footprint.out, "JSON report path");
  sc_footprint->callback([&] { run_footprint(footprint); });

  ContextMatrixParams context_matrix;
  auto* sc_ctx = app.add_subcommand("context-matrix",
                                    "Pairwise distances of per-position context vectors");
  sc_ctx->add_option("--dataset", context_matrix.dataset, "Dataset path")->required();
  sc_ctx->add_option("--model", context_matrix.model, "Optional ctx-cim model path");
  sc_ctx->add_option("--seed", context_matrix.seed, "Seed for CIMs and bundling");
  sc_ctx->add_option("--out", context_matrix.out, "Output path");
  sc_ctx->add_option("--format", context_matrix.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sc_ctx->add_option("--config", context_matrix.config_path, "JSON CIM config");
  sc_ctx->callback([&] { run_context_matrix(context_matrix); });

  UpdateParams update;
  auto* sc_update = app.add_subcommand("update", "Superpose new samples into a model");
  sc_update->add_option("--model", update.model, "Model path")->required();
  sc_update->add_option("--dataset", update.dataset, "New-sample dataset path")->required();
  sc_update->add_option("--model-out", update.model_out,
                        "Updated model path (defaults to --model)");
  sc_update->add_option("--out", update.out, "JSON report path");
  sc_update->add_option("--threads", update.threads, "Worker threads (0 = auto)");
  sc_update->callback([&] { run_update(update); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const hdc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const hdc::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
