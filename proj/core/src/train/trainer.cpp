#include "hit/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hit/ad/ops.hpp"
#include "hit/ad/tape.hpp"
#include "hit/error.hpp"
#include "hit/train/optimizer.hpp"

namespace hit::train {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs) throw ConfigError("warmup_epochs must lie in [0, epochs]");
  if (schedule != "cosine") throw ConfigError("unknown schedule '" + schedule + "' (only cosine is supported)");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw ConfigError("label_smoothing must lie in [0, 1)");
  if (eval_every < 0) throw ConfigError("eval_every must be non-negative");
}

namespace {

constexpr std::size_t kEvalBatch = 64;

int argmax_row(std::span<const float> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

std::vector<int> predict(const model::HitModel<float>& m, std::span<const Image> images,
                         const model::ForwardOptions& options, std::size_t workers) {
  const std::size_t classes = static_cast<std::size_t>(m.config().num_classes);
  std::vector<int> out(images.size());
  const std::size_t batches = (images.size() + kEvalBatch - 1) / kEvalBatch;
  parallel_for(
      batches,
      [&](std::size_t b) {
        const std::size_t lo = b * kEvalBatch, hi = std::min(images.size(), lo + kEvalBatch);
        model::ForwardOptions o = options;
        o.training = false;
        o.capture = false;
        const auto result = m.forward(images.subspan(lo, hi - lo), o);
        auto logits = result.logits.data();
        for (std::size_t i = lo; i < hi; ++i) out[i] = argmax_row(logits.subspan((i - lo) * classes, classes));
      },
      workers);
  return out;
}

double evaluate_top1(const model::HitModel<float>& m, const Dataset& data, const model::ForwardOptions& options,
                     std::size_t workers) {
  if (data.size() == 0) return 0.0;
  const auto images = data.images();
  const auto pred = predict(m, images, options, workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.samples[i].label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(model::HitModel<float> m, const TrainConfig& config, const Dataset& train_set,
                  const Dataset* eval_set, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.size() == 0) throw ConfigError("training set is empty");
  for (const auto& s : train_set.samples)
    if (s.label < 0 || s.label >= m.config().num_classes)
      throw ConfigError("label " + std::to_string(s.label) + " outside [0, " +
                        std::to_string(m.config().num_classes) + ")");

  model::for_each_tensor(m.params(), [](Tensor<float>& t) { t.set_requires_grad(true); });
  AdamW<float> opt(m.named_parameters(), AdamWOptions{0.9, 0.999, 1e-8, config.weight_decay});
  std::mt19937_64 rng(config.seed);

  const std::size_t n = train_set.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);
  const std::size_t warmup_steps = steps_per_epoch * static_cast<std::size_t>(config.warmup_epochs);

  TrainResult result;
  model::HitModel<float> last_good = m.clone();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (int epoch = 1; epoch <= config.epochs && !result.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t lo = 0; lo < n; lo += batch) {
      const std::size_t hi = std::min(n, lo + batch);
      std::vector<Image> images;
      std::vector<int> targets;
      for (std::size_t i = lo; i < hi; ++i) {
        const Sample& s = train_set.samples[order[i]];
        const bool flip = config.hflip && (rng() & 1u) != 0;
        images.push_back(flip ? hflip(s.image) : s.image);
        targets.push_back(s.label);
      }

      ad::Tape<float> tape;
      Tensor<float> loss;
      {
        ad::Tape<float>::Recording rec(tape);
        model::ForwardOptions o;
        o.training = true;
        o.rng = &rng;
        auto out = m.forward(images, o);
        loss = ad::cross_entropy_smoothed(out.logits, std::span<const int>(targets), config.label_smoothing);
      }
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        result.diverged = true;
        break;
      }
      tape.backward(loss);
      opt.step(scheduled_lr(step, total_steps, warmup_steps, config.lr));
      opt.zero_grad();
      ++step;
      result.step_losses.push_back(value);
      loss_sum += value;
    }
    if (result.diverged) break;

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    const bool evaluate = eval_set != nullptr && eval_set->size() > 0 &&
                          (epoch == config.epochs || (config.eval_every > 0 && epoch % config.eval_every == 0));
    if (evaluate) entry.eval_acc = evaluate_top1(m, *eval_set);
    result.log.push_back(entry);
    result.epochs_completed = epoch;
    last_good = m.clone();
    if (on_epoch) on_epoch(m, entry);
  }

  result.model = result.diverged ? std::move(last_good) : std::move(m);
  model::for_each_tensor(result.model.params(), [](Tensor<float>& t) { t.set_requires_grad(false); });
  return result;
}

}  // namespace hit::train
