#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hit/model/hit_model.hpp"
#include "hit/parallel.hpp"
#include "hit/train/dataset.hpp"

namespace hit::train {

using ad::Tensor;

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 0.05;
  int batch_size = 64;
  int epochs = 30;
  int warmup_epochs = 3;
  std::string schedule = "cosine";
  double label_smoothing = 0.1;
  std::uint64_t seed = 0;
  bool hflip = false;  // flips move the blob across quadrants, so off for synthetic data
  int eval_every = 1;  // epochs between evaluations; 0 evaluates only after the last epoch

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  int epoch = 0;             // 1-based
  double train_loss = 0.0;   // mean over the epoch's batches
  double eval_acc = -1.0;    // -1 when not evaluated this epoch
};

struct TrainResult {
  model::HitModel<float> model{model::HitConfig{}};
  std::vector<EpochLog> log;
  std::vector<double> step_losses;
  bool diverged = false;  // model then holds the last completed epoch
  int epochs_completed = 0;
};

using EpochCallback = std::function<void(const model::HitModel<float>&, const EpochLog&)>;

/// Deterministic for a fixed seed: the shuffle, flips and attention dropout
/// all draw from one generator seeded by config.seed.
TrainResult train(model::HitModel<float> model, const TrainConfig& config, const Dataset& train_set,
                  const Dataset* eval_set = nullptr, const EpochCallback& on_epoch = {});

/// Predicted class per image, batched and fanned out over `workers`.
std::vector<int> predict(const model::HitModel<float>& model, std::span<const Image> images,
                         const model::ForwardOptions& options = {}, std::size_t workers = worker_count());

double evaluate_top1(const model::HitModel<float>& model, const Dataset& data,
                     const model::ForwardOptions& options = {}, std::size_t workers = worker_count());

}  // namespace hit::train
