#include "hdc/position_classifier.hpp"

#include <algorithm>
#include <set>

#include "hdc/error.hpp"

namespace hdc {

int LinearPositionModel::predict_index(const std::array<double, 3>& accel) const {
  require(!position_ids.empty(), "position model is untrained");
  int best = 0;
  double best_score = 0.0;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    double score = biases[p];
    for (int k = 0; k < 3; ++k) {
      score += static_cast<double>(weights[p][static_cast<std::size_t>(k)]) *
               accel[static_cast<std::size_t>(k)];
    }
    if (p == 0 || score > best_score) {
      best = static_cast<int>(p);
      best_score = score;
    }
  }
  return best;
}

int LinearPositionModel::predict(const std::array<double, 3>& accel) const {
  return position_ids[static_cast<std::size_t>(predict_index(accel))];
}

LinearPositionModel train_position(std::span<const PositionSample> samples,
                                   const PositionTrainConfig& config) {
  require(!samples.empty(), "position training needs samples");
  require(config.epochs >= 1, "position training needs epochs >= 1");
  require(config.batches >= 1, "position training needs batches >= 1");
  require(config.lr0 > 0.0, "position training needs lr0 > 0");
  require(config.l2 >= 0.0 && config.lr_decay >= 0.0, "position training rates must be >= 0");
  require(config.warm_frac >= 0.0 && config.warm_frac <= 1.0,
          "position training warm_frac must lie in [0,1]");
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.position);
  require(ids.size() >= 2, "position training needs at least two distinct labels");

  LinearPositionModel model;
  model.position_ids.assign(ids.begin(), ids.end());
  const std::size_t n_positions = model.position_ids.size();
  model.weights.assign(n_positions, {0.0f, 0.0f, 0.0f});
  model.biases.assign(n_positions, 0.0f);

  const std::size_t n = samples.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::lower_bound(model.position_ids.begin(), model.position_ids.end(),
                                     samples[i].position);
    label[i] = static_cast<std::size_t>(it - model.position_ids.begin());
  }

  // Cyclic mini-batch subgradient descent on the one-vs-rest hinge
  // objectives: batch k of an epoch is the stride slice {k, k+B, k+2B, ...}.
  // Deterministic (no shuffling), and each slice spans the whole file, so
  // every batch sees a roughly class-balanced cross-section.
  //
  // The schedule runs flat at lr0 for warm_frac of the steps, then anneals
  // as lr0 / (1 + lr_decay * steps_past_warm). Closely spaced positions only
  // a few degrees apart need score differences the hinge can't express with
  // small weights; the long flat phase grows the discriminating weights
  // before the anneal freezes the midpoint boundary in place.
  std::vector<std::array<double, 3>> w(n_positions, {0.0, 0.0, 0.0});
  std::vector<double> b(n_positions, 0.0);
  std::vector<std::array<double, 3>> gw(n_positions);
  std::vector<double> gb(n_positions);
  const std::size_t n_batches = std::min<std::size_t>(static_cast<std::size_t>(config.batches), n);
  const long long total_steps = static_cast<long long>(config.epochs) *
                                static_cast<long long>(n_batches);
  const long long warm_steps =
      static_cast<long long>(config.warm_frac * static_cast<double>(total_steps));
  long long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t k = 0; k < n_batches; ++k) {
      const double lr =
          step < warm_steps
              ? config.lr0
              : config.lr0 / (1.0 + config.lr_decay * static_cast<double>(step - warm_steps));
      ++step;
      for (std::size_t p = 0; p < n_positions; ++p) {
        gw[p] = {0.0, 0.0, 0.0};
        gb[p] = 0.0;
      }
      std::size_t batch_size = 0;
      for (std::size_t i = k; i < n; i += n_batches, ++batch_size) {
        const auto& x = samples[i].accel;
        for (std::size_t p = 0; p < n_positions; ++p) {
          const double y = label[i] == p ? 1.0 : -1.0;
          const double score = b[p] + w[p][0] * x[0] + w[p][1] * x[1] + w[p][2] * x[2];
          if (y * score < 1.0) {
            gw[p][0] += y * x[0];
            gw[p][1] += y * x[1];
            gw[p][2] += y * x[2];
            gb[p] += y;
          }
        }
      }
      const double scale = lr / static_cast<double>(batch_size);
      const double shrink = 1.0 - lr * config.l2;
      for (std::size_t p = 0; p < n_positions; ++p) {
        for (int k2 = 0; k2 < 3; ++k2) {
          w[p][static_cast<std::size_t>(k2)] =
              shrink * w[p][static_cast<std::size_t>(k2)] +
              scale * gw[p][static_cast<std::size_t>(k2)];
        }
        b[p] += scale * gb[p];
      }
    }
  }

  for (std::size_t p = 0; p < n_positions; ++p) {
    for (int k = 0; k < 3; ++k) {
      model.weights[p][static_cast<std::size_t>(k)] =
          static_cast<float>(w[p][static_cast<std::size_t>(k)]);
    }
    model.biases[p] = static_cast<float>(b[p]);
  }
  return model;
}

std::int64_t parameter_bits(const LinearPositionModel& model, int n_vectors) {
  (void)model;
  return stored_vector_bits(n_vectors);
}

std::int64_t primal_parameter_bits(const LinearPositionModel& model) {
  return static_cast<std::int64_t>(model.n_positions()) * 4 * 32;
}

}  // namespace hdc
