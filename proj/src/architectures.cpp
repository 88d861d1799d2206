#include "hdc/architectures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "hdc/error.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

namespace {

int index_of(const std::vector<int>& sorted_ids, int id) {
  auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
  if (it == sorted_ids.end() || *it != id) return -1;
  return static_cast<int>(it - sorted_ids.begin());
}

// The hypervector a sample contributes to (or queries) an associative
// memory with, under the given architecture's context binding. For
// ContextOrthogonalization the caller supplies the position index to use:
// the ground-truth label during training, the classifier's prediction at
// inference time.
Hypervector bound_hv(const Model& model, const EncodedSample& sample, int position_index) {
  switch (model.architecture) {
    case Architecture::DirectSuperposition:
    case Architecture::DualStage:
      return sample.emg_hv;
    case Architecture::ContextOrthogonalization:
      return bind(model.context_memory->entry(position_index), sample.emg_hv);
    case Architecture::AccelCimContext:
      return bind(encode_accel_context(sample.accel_mean, *model.cims), sample.emg_hv);
  }
  throw ContractViolation("unknown architecture");
}

std::vector<PositionSample> position_samples(std::span<const EncodedSample> samples) {
  std::vector<PositionSample> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i] = PositionSample{samples[i].accel_mean, samples[i].position};
  }
  return out;
}

}  // namespace

const char* architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::DirectSuperposition: return "direct";
    case Architecture::DualStage: return "dual";
    case Architecture::ContextOrthogonalization: return "ctx-ortho";
    case Architecture::AccelCimContext: return "ctx-cim";
  }
  return "unknown";
}

std::optional<Architecture> architecture_from_name(const std::string& name) {
  if (name == "direct") return Architecture::DirectSuperposition;
  if (name == "dual") return Architecture::DualStage;
  if (name == "ctx-ortho") return Architecture::ContextOrthogonalization;
  if (name == "ctx-cim") return Architecture::AccelCimContext;
  return std::nullopt;
}

int Model::gesture_index(int gesture_id) const { return index_of(gesture_ids, gesture_id); }
int Model::position_index(int position_id) const { return index_of(position_ids, position_id); }

ItemMemory build_model_item_memory(std::uint64_t master_seed, int n_channels, int dim) {
  return ItemMemory::build(n_channels, dim,
                           RandomSource(master_seed).child(seed_key::kItemMemory).seed());
}

RandomSource encode_rng(std::uint64_t master_seed) {
  return RandomSource(master_seed).child(seed_key::kEncode);
}

Model train(Architecture arch, std::span<const EncodedSample> samples, const ItemMemory& im,
            const TrainConfig& config, std::uint64_t master_seed) {
  require(!samples.empty(), "train: sample set is empty");
  require(config.dim >= 1, "train: dim must be positive");
  if (im.size() > 0) {
    require(im.dim() == config.dim, "train: item memory dim does not match config dim");
  }

  std::set<int> gesture_set;
  std::set<int> position_set;
  for (const EncodedSample& s : samples) {
    require(s.emg_hv.dim() == config.dim, "train: sample dim does not match config dim");
    gesture_set.insert(s.gesture);
    position_set.insert(s.position);
  }

  Model m;
  m.architecture = arch;
  m.dim = config.dim;
  m.master_seed = master_seed;
  m.gesture_ids.assign(gesture_set.begin(), gesture_set.end());
  m.position_ids.assign(position_set.begin(), position_set.end());
  m.item_memory = im;
  m.cim_params = config.cim_params;

  const RandomSource root(master_seed);
  const RandomSource am_root = root.child(seed_key::kAm);

  const bool position_aware =
      arch == Architecture::DualStage || arch == Architecture::ContextOrthogonalization;
  if (position_aware) {
    for (const EncodedSample& s : samples) {
      require(s.position >= 0, "train: position labels required for this architecture");
    }
    require(m.position_ids.size() >= 1, "train: no positions in sample set");
  }

  switch (arch) {
    case Architecture::DirectSuperposition: {
      m.ams.emplace_back(m.gesture_ids, m.dim, am_root.child(0).seed());
      for (const EncodedSample& s : samples) m.ams[0].add(s.gesture, s.emg_hv);
      break;
    }
    case Architecture::DualStage: {
      std::set<std::pair<int, int>> cells;
      for (const EncodedSample& s : samples) cells.insert({s.position, s.gesture});
      require(cells.size() == m.position_ids.size() * m.gesture_ids.size(),
              "train: dual-stage needs every gesture present at every position");
      for (std::size_t p = 0; p < m.position_ids.size(); ++p) {
        m.ams.emplace_back(m.gesture_ids, m.dim, am_root.child(p).seed());
      }
      for (const EncodedSample& s : samples) {
        m.ams[static_cast<std::size_t>(m.position_index(s.position))].add(s.gesture, s.emg_hv);
      }
      break;
    }
    case Architecture::ContextOrthogonalization: {
      m.context_memory = ContextMemory::build(m.position_ids, m.dim,
                                              root.child(seed_key::kContextMemory).seed());
      m.ams.emplace_back(m.gesture_ids, m.dim, am_root.child(0).seed());
      for (const EncodedSample& s : samples) {
        m.ams[0].add(s.gesture, bound_hv(m, s, m.position_index(s.position)));
      }
      break;
    }
    case Architecture::AccelCimContext: {
      std::array<ContinuousItemMemory, 3> cims;
      for (int axis = 0; axis < 3; ++axis) {
        cims[static_cast<std::size_t>(axis)] = ContinuousItemMemory::build(
            config.cim_params[static_cast<std::size_t>(axis)], m.dim,
            root.child(seed_key::kCim).child(static_cast<std::uint64_t>(axis)).seed());
      }
      m.cims = std::move(cims);
      m.ams.emplace_back(m.gesture_ids, m.dim, am_root.child(0).seed());
      for (const EncodedSample& s : samples) m.ams[0].add(s.gesture, bound_hv(m, s, -1));
      break;
    }
  }

  for (AssociativeMemory& am : m.ams) am.finalize();

  if (position_aware) {
    require(arch != Architecture::DualStage || m.position_ids.size() >= 2,
            "train: dual-stage needs at least two positions");
    // A single position needs no selector: the lone context vector is bound
    // to every sample and inference always picks it.
    if (m.position_ids.size() >= 2) {
      m.position_model = train_position(position_samples(samples), config.position);
      require(m.position_model->position_ids == m.position_ids,
              "train: position classifier label set mismatch");
    }
  }
  return m;
}

std::pair<int, DecisionTrace> infer(const Model& model, const EncodedSample& sample) {
  require(sample.emg_hv.dim() == model.dim, "infer: sample dim does not match model dim");
  require(!model.ams.empty(), "infer: model has no associative memory");

  DecisionTrace trace;
  const AssociativeMemory* am = &model.ams[0];
  Hypervector query = sample.emg_hv;

  switch (model.architecture) {
    case Architecture::DirectSuperposition:
      break;
    case Architecture::DualStage: {
      require(model.position_model.has_value(), "infer: missing position classifier");
      const int pidx = model.position_model->predict_index(sample.accel_mean);
      trace.selected_position_index = pidx;
      am = &model.ams[static_cast<std::size_t>(pidx)];
      break;
    }
    case Architecture::ContextOrthogonalization: {
      require(model.context_memory.has_value(), "infer: missing context memory");
      int pidx = 0;
      if (model.context_memory->size() > 1) {
        require(model.position_model.has_value(), "infer: missing position classifier");
        pidx = model.position_model->predict_index(sample.accel_mean);
      }
      trace.selected_position_index = pidx;
      query = bound_hv(model, sample, pidx);
      break;
    }
    case Architecture::AccelCimContext: {
      require(model.cims.has_value(), "infer: missing continuous item memories");
      query = bound_hv(model, sample, -1);
      break;
    }
  }

  AssociativeMemory::QueryResult result = am->query(query);
  trace.predicted_gesture = result.class_id;
  trace.predicted_gesture_index = result.class_index;
  trace.distances = std::move(result.distances);
  return {trace.predicted_gesture, trace};
}

EvalReport evaluate(const Model& model, std::span<const EncodedSample> samples) {
  require(!samples.empty(), "evaluate: test set is empty");

  std::set<int> position_set;
  for (const EncodedSample& s : samples) {
    require(model.gesture_index(s.gesture) >= 0, "evaluate: test gesture unknown to model");
    position_set.insert(s.position);
  }

  EvalReport report;
  report.n_samples = samples.size();
  report.position_ids.assign(position_set.begin(), position_set.end());
  report.per_position_counts.assign(report.position_ids.size(), 0);
  report.gesture_ids = model.gesture_ids;
  const std::size_t n_gestures = model.gesture_ids.size();
  report.confusion.assign(n_gestures, std::vector<std::int64_t>(n_gestures, 0));

  std::vector<std::int64_t> per_position_correct(report.position_ids.size(), 0);
  std::int64_t correct = 0;
  double sum_true = 0.0;
  double sum_wrong = 0.0;
  double sum_margin = 0.0;

  for (const EncodedSample& s : samples) {
    const auto [predicted, trace] = infer(model, s);
    const int true_idx = model.gesture_index(s.gesture);
    const int pos_idx = index_of(report.position_ids, s.position);
    report.confusion[static_cast<std::size_t>(true_idx)]
                    [static_cast<std::size_t>(trace.predicted_gesture_index)]++;
    report.per_position_counts[static_cast<std::size_t>(pos_idx)]++;
    if (predicted == s.gesture) {
      ++correct;
      ++per_position_correct[static_cast<std::size_t>(pos_idx)];
    }

    const double d_true = trace.distances[static_cast<std::size_t>(true_idx)];
    double d_wrong = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < trace.distances.size(); ++g) {
      if (static_cast<int>(g) != true_idx) d_wrong = std::min(d_wrong, trace.distances[g]);
    }
    if (!std::isfinite(d_wrong)) d_wrong = 0.0;  // single-class model
    sum_true += d_true;
    sum_wrong += d_wrong;
    const double denom = d_true + d_wrong;
    sum_margin += denom > 0.0 ? (d_wrong - d_true) / denom : 0.0;
  }

  const double n = static_cast<double>(samples.size());
  report.overall_accuracy = static_cast<double>(correct) / n;
  report.per_position_accuracy.resize(report.position_ids.size());
  for (std::size_t p = 0; p < report.position_ids.size(); ++p) {
    report.per_position_accuracy[p] =
        static_cast<double>(per_position_correct[p]) /
        static_cast<double>(report.per_position_counts[p]);
  }
  report.mean_true_class_distance = sum_true / n;
  report.mean_wrong_class_distance = sum_wrong / n;
  report.mean_margin = sum_margin / n;
  return report;
}

EvalReport cross_validate(Architecture arch, std::span<const EncodedSample> samples,
                          const ItemMemory& im, const CrossValConfig& config) {
  const int k = config.folds;
  require(k >= 2, "cross_validate: folds must be at least 2");
  require(samples.size() >= static_cast<std::size_t>(k),
          "cross_validate: fewer samples than folds");

  // Stratified assignment: shuffle each (gesture, position) cell's units and
  // deal them round-robin, staggering the starting fold per cell so small
  // cells do not all favor fold 0. A unit is one sample or one repetition
  // run depending on the configured granularity.
  std::map<std::pair<int, int>, std::map<int, std::vector<std::size_t>>> cells;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const EncodedSample& s = samples[i];
    const int unit = config.granularity == FoldGranularity::Sample ? static_cast<int>(i)
                                                                   : s.repetition;
    cells[{s.gesture, s.position}][unit].push_back(i);
  }

  const RandomSource root(config.seed);
  const RandomSource shuffle_root = root.child(seed_key::kCrossVal).child(1);
  const RandomSource fold_seed_root = root.child(seed_key::kCrossVal).child(2);

  std::vector<int> fold_of(samples.size(), 0);
  std::uint64_t cell_ordinal = 0;
  for (const auto& [cell, units] : cells) {
    std::vector<int> unit_keys;
    unit_keys.reserve(units.size());
    for (const auto& [unit, indices] : units) unit_keys.push_back(unit);
    RandomSource rng = shuffle_root.child(cell_ordinal);
    for (std::size_t i = unit_keys.size(); i > 1; --i) {
      std::swap(unit_keys[i - 1], unit_keys[rng.next_below(i)]);
    }
    const int offset = static_cast<int>(cell_ordinal % static_cast<std::uint64_t>(k));
    for (std::size_t u = 0; u < unit_keys.size(); ++u) {
      const int fold = (offset + static_cast<int>(u)) % k;
      for (std::size_t idx : units.at(unit_keys[u])) fold_of[idx] = fold;
    }
    ++cell_ordinal;
  }

  std::set<int> all_gestures;
  for (const EncodedSample& s : samples) all_gestures.insert(s.gesture);

  std::vector<EvalReport> fold_reports(static_cast<std::size_t>(k));
  parallel_for(static_cast<std::size_t>(k), config.threads, [&](std::size_t f) {
    std::vector<EncodedSample> train_set;
    std::vector<EncodedSample> test_set;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (fold_of[i] == static_cast<int>(f) ? test_set : train_set).push_back(samples[i]);
    }
    require(!test_set.empty(), "cross_validate: a fold received no test samples");
    std::set<int> train_gestures;
    for (const EncodedSample& s : train_set) train_gestures.insert(s.gesture);
    require(train_gestures.size() == all_gestures.size(),
            "cross_validate: a training fold is missing a gesture");
    const Model model =
        train(arch, train_set, im, config.train, fold_seed_root.child(f).seed());
    fold_reports[f] = evaluate(model, test_set);
  });

  EvalReport report;
  report.gesture_ids = fold_reports[0].gesture_ids;
  const std::size_t n_gestures = report.gesture_ids.size();
  report.confusion.assign(n_gestures, std::vector<std::int64_t>(n_gestures, 0));

  std::set<int> position_union;
  for (const EvalReport& fr : fold_reports) {
    position_union.insert(fr.position_ids.begin(), fr.position_ids.end());
  }
  report.position_ids.assign(position_union.begin(), position_union.end());
  std::vector<std::int64_t> pos_correct(report.position_ids.size(), 0);
  report.per_position_counts.assign(report.position_ids.size(), 0);

  std::int64_t correct = 0;
  double sum_true = 0.0;
  double sum_wrong = 0.0;
  double sum_margin = 0.0;
  std::size_t total = 0;

  for (const EvalReport& fr : fold_reports) {
    report.fold_accuracies.push_back(fr.overall_accuracy);
    total += fr.n_samples;
    const double n = static_cast<double>(fr.n_samples);
    sum_true += fr.mean_true_class_distance * n;
    sum_wrong += fr.mean_wrong_class_distance * n;
    sum_margin += fr.mean_margin * n;
    for (std::size_t i = 0; i < n_gestures; ++i) {
      for (std::size_t j = 0; j < n_gestures; ++j) report.confusion[i][j] += fr.confusion[i][j];
      correct += fr.confusion[i][i];
    }
    for (std::size_t p = 0; p < fr.position_ids.size(); ++p) {
      const int agg = index_of(report.position_ids, fr.position_ids[p]);
      report.per_position_counts[static_cast<std::size_t>(agg)] += fr.per_position_counts[p];
      pos_correct[static_cast<std::size_t>(agg)] += std::llround(
          fr.per_position_accuracy[p] * static_cast<double>(fr.per_position_counts[p]));
    }
  }

  report.n_samples = total;
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  report.per_position_accuracy.resize(report.position_ids.size());
  for (std::size_t p = 0; p < report.position_ids.size(); ++p) {
    report.per_position_accuracy[p] = static_cast<double>(pos_correct[p]) /
                                      static_cast<double>(report.per_position_counts[p]);
  }
  report.mean_true_class_distance = sum_true / static_cast<double>(total);
  report.mean_wrong_class_distance = sum_wrong / static_cast<double>(total);
  report.mean_margin = sum_margin / static_cast<double>(total);
  return report;
}

FootprintReport footprint_bits(const Model& model, bool count_memories) {
  FootprintReport r;
  r.n_ams = static_cast<int>(model.ams.size());
  r.n_classes = static_cast<int>(model.gesture_ids.size());
  r.dim = model.dim;
  r.prototype_bits = static_cast<std::int64_t>(r.n_ams) * r.n_classes * r.dim;
  r.position_model_bits = model.position_model.has_value()
                              ? parameter_bits(*model.position_model)
                              : 0;
  r.total_bits = r.prototype_bits + r.position_model_bits;
  r.total_with_memories = r.total_bits;
  if (count_memories) {
    r.memories_counted = true;
    r.item_memory_bits = static_cast<std::int64_t>(model.item_memory.size()) * model.dim;
    if (model.context_memory.has_value()) {
      r.context_memory_bits =
          static_cast<std::int64_t>(model.context_memory->size()) * model.dim;
    }
    if (model.cims.has_value()) {
      for (const ContinuousItemMemory& cim : *model.cims) {
        r.cim_bits += static_cast<std::int64_t>(cim.levels()) * model.dim;
      }
    }
    r.total_with_memories += r.item_memory_bits + r.context_memory_bits + r.cim_bits;
  }
  return r;
}

ContextMatrix context_distance_matrix(std::span<const EncodedSample> samples,
                                      const std::array<ContinuousItemMemory, 3>& cims,
                                      std::uint64_t seed) {
  require(!samples.empty(), "context_distance_matrix: sample set is empty");
  const int dim = cims[0].dim();
  for (const ContinuousItemMemory& cim : cims) {
    require(cim.levels() >= 2 && cim.dim() == dim,
            "context_distance_matrix: invalid continuous item memory");
  }

  std::set<int> position_set;
  for (const EncodedSample& s : samples) position_set.insert(s.position);

  ContextMatrix out;
  out.position_ids.assign(position_set.begin(), position_set.end());
  const std::size_t n = out.position_ids.size();

  std::vector<Accumulator> acc(n, Accumulator(dim));
  for (const EncodedSample& s : samples) {
    const int p = index_of(out.position_ids, s.position);
    acc[static_cast<std::size_t>(p)].add(encode_accel_context(s.accel_mean, cims));
  }

  const RandomSource root(seed);
  std::vector<Hypervector> bundled;
  bundled.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    RandomSource rng = root.child(p);
    bundled.push_back(acc[p].bipolarize(rng));
  }

  out.distances.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = hamming(bundled[i], bundled[j]);
      out.distances[i][j] = d;
      out.distances[j][i] = d;
    }
  }
  return out;
}

Model update(const Model& model, std::span<const EncodedSample> new_samples) {
  require(model.architecture != Architecture::DualStage,
          "update: dual-stage models have per-position memories and must be retrained");
  require(model.ams.size() == 1, "update: expected a single associative memory");

  Model m = model;
  for (const EncodedSample& s : new_samples) {
    require(s.emg_hv.dim() == m.dim, "update: sample dim does not match model dim");
    require(m.gesture_index(s.gesture) >= 0, "update: gesture unknown to model");
    int position_index = -1;
    if (m.architecture == Architecture::ContextOrthogonalization) {
      position_index = m.position_index(s.position);
      require(position_index >= 0, "update: position unknown to model");
    }
    m.ams[0].add(s.gesture, bound_hv(m, s, position_index));
  }
  m.ams[0].finalize();
  return m;
}

}  // namespace hdc
