#include <gtest/gtest.h>

#include <cmath>

#include "hit/error.hpp"
#include "hit/train/trainer.hpp"
#include "support/test_support.hpp"

using namespace hit;

namespace {

model::HitConfig small_config() {
  model::HitConfig c;
  c.depth = 2;
  c.d_model = 16;
  c.heads = 2;
  c.mlp_ratio = 2;
  c.image_size = 16;
  c.patch_size = 4;
  c.pool_layers = {1};
  c.num_classes = 4;
  c.attn_dropout = 0.1;
  return c;
}

train::TrainConfig quick(int epochs) {
  train::TrainConfig t;
  t.epochs = epochs;
  t.warmup_epochs = 1;
  t.batch_size = 8;
  t.lr = 3e-3;
  return t;
}

}  // namespace

TEST(Trainer, SameSeedSameLosses) {
  auto data = train::synth_quadrant(6, 16, 1);
  auto a = train::train(model::HitModel<float>::initialized(small_config(), 1), quick(2), data);
  auto b = train::train(model::HitModel<float>::initialized(small_config(), 1), quick(2), data);
  ASSERT_EQ(a.step_losses.size(), 6u);
  EXPECT_EQ(a.step_losses, b.step_losses);
  auto cfg = quick(2);
  cfg.seed = 5;
  auto c = train::train(model::HitModel<float>::initialized(small_config(), 1), cfg, data);
  EXPECT_NE(a.step_losses, c.step_losses);
  for (const auto& [name, t] : a.model.named_parameters()) EXPECT_FALSE(t.requires_grad()) << name;
}

TEST(Trainer, LossFallsOnSyntheticData) {
  auto data = train::synth_quadrant(16, 16, 2);
  auto cfg = quick(12);
  std::vector<train::EpochLog> seen;
  auto r = train::train(model::HitModel<float>::initialized(small_config(), 3), cfg, data, &data,
                        [&](const model::HitModel<float>&, const train::EpochLog& log) { seen.push_back(log); });
  ASSERT_EQ(r.log.size(), 12u);
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(r.epochs_completed, 12);
  EXPECT_FALSE(r.diverged);
  EXPECT_LT(r.log.back().train_loss, r.log.front().train_loss);
  EXPECT_GE(r.log.back().eval_acc, 0.0);
}

TEST(Trainer, LossOnOneFixedBatchDecreasesEveryStep) {
  auto data = train::synth_quadrant(2, 16, 4);
  auto c = small_config();
  c.attn_dropout = 0.0;
  auto cfg = quick(10);
  cfg.warmup_epochs = 0;
  cfg.label_smoothing = 0.0;
  cfg.lr = 1e-3;
  auto r = train::train(model::HitModel<float>::initialized(c, 6), cfg, data);
  ASSERT_EQ(r.step_losses.size(), 10u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(r.step_losses[i], r.step_losses[i - 1]) << "step " << i;
}

TEST(Trainer, NanLossStopsWithTheLastGoodModel) {
  auto data = train::synth_quadrant(4, 16, 4);
  auto cfg = quick(3);
  cfg.lr = 1e38;
  cfg.warmup_epochs = 0;
  auto r = train::train(model::HitModel<float>::initialized(small_config(), 5), cfg, data);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.epochs_completed, 3);
  for (const auto& [name, t] : r.model.named_parameters())
    for (float v : t.data()) ASSERT_TRUE(std::isfinite(v)) << name;
}

TEST(Trainer, ConfigValidation) {
  train::TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.warmup_epochs = t.epochs + 1;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.schedule = "step";
  EXPECT_THROW(t.validate(), ConfigError);
  auto data = train::synth_quadrant(1, 16, 1);
  auto c = small_config();
  c.num_classes = 2;
  EXPECT_THROW(train::train(model::HitModel<float>::initialized(c, 1), quick(1), data), ConfigError);
}

TEST(Trainer, PredictMatchesForwardAndIsWorkerIndependent) {
  auto m = fixtures::lively_model<float>(small_config(), 6, 5.0);
  auto data = train::synth_quadrant(20, 16, 7);
  auto imgs = data.images();
  auto one = train::predict(m, imgs, {}, 1), many = train::predict(m, imgs, {}, 3);
  EXPECT_EQ(one, many);
  auto logits = m.forward(std::span<const Image>(imgs.data(), 1)).logits;
  EXPECT_EQ(one[0], std::max_element(logits.data().begin(), logits.data().end()) - logits.data().begin());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < imgs.size(); ++i) hits += one[i] == data.samples[i].label;
  EXPECT_DOUBLE_EQ(train::evaluate_top1(m, data), static_cast<double>(hits) / 80.0);
}
