#include <gtest/gtest.h>

#include "hit/error.hpp"
#include "hit/eval/ablation.hpp"
#include "hit/eval/sanity.hpp"
#include "hit/posthoc/posthoc.hpp"
#include "hit/train/trainer.hpp"
#include "support/test_support.hpp"

using namespace hit;
using eval::AblationMode;

namespace {

// Images labelled with the model's own predictions, so the intact model
// scores 1.
train::Dataset self_labelled(const model::HitModel<float>& m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  train::Dataset d;
  d.num_classes = m.config().num_classes;
  std::vector<Image> imgs;
  for (std::size_t i = 0; i < n; ++i) imgs.push_back(fixtures::random_image(m.config().image_size, rng));
  auto pred = train::predict(m, imgs);
  for (std::size_t i = 0; i < n; ++i) d.samples.push_back({imgs[i], pred[i], std::nullopt});
  return d;
}

double accuracy_with(const model::HitModel<float>& m, const train::Dataset& d, std::vector<bool> dropped) {
  std::size_t hits = 0;
  for (const auto& s : d.samples) {
    model::ForwardOptions o;
    o.drop_layers = dropped;
    auto logits = m.forward(std::span<const Image>(&s.image, 1), o).logits;
    hits += (std::max_element(logits.data().begin(), logits.data().end()) - logits.data().begin()) == s.label;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace

TEST(Ablation, SettingsAndAccuraciesMatchDirectEvaluation) {
  auto c = fixtures::toy_config(3, 8, 2, {1});
  auto m = fixtures::lively_model<float>(c, 1, 5.0);
  auto d = self_labelled(m, 24, 2);
  auto rows = eval::layer_ablation(m, d, AblationMode::kCumulativeRemoved);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].setting, "removed-none");
  EXPECT_EQ(rows[1].setting, "removed-2");
  EXPECT_EQ(rows[3].setting, "removed-2+1+0");
  EXPECT_DOUBLE_EQ(rows[0].accuracy, 1.0);
  for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.accuracy, accuracy_with(m, d, r.dropped)) << r.setting;

  auto ins = eval::layer_ablation(m, d, AblationMode::kCumulativeInserted, std::vector<int>{0, 2, 1});
  EXPECT_EQ(ins.front().dropped, (std::vector<bool>{true, true, true}));
  EXPECT_EQ(ins[2].setting, "inserted-0+2");
  EXPECT_EQ(ins[2].dropped, (std::vector<bool>{false, true, false}));
  EXPECT_DOUBLE_EQ(ins.back().accuracy, 1.0);

  auto excl = eval::layer_ablation(m, d, AblationMode::kExcluding);
  ASSERT_EQ(excl.size(), 3u);
  EXPECT_EQ(excl[1].setting, "without-1");
  EXPECT_EQ(excl[1].dropped, (std::vector<bool>{false, true, false}));
  auto only = eval::layer_ablation(m, d, AblationMode::kExclusive);
  EXPECT_EQ(only[2].setting, "only-2");
  EXPECT_EQ(only[2].dropped, (std::vector<bool>{true, true, false}));
  EXPECT_THROW(eval::layer_ablation(m, d, AblationMode::kExclusive, std::vector<int>{3}), IndexError);
}

TEST(Ablation, ModeNamesRoundTrip) {
  for (auto mode : {AblationMode::kExcluding, AblationMode::kExclusive, AblationMode::kCumulativeRemoved,
                    AblationMode::kCumulativeInserted})
    EXPECT_EQ(eval::parse_ablation_mode(eval::to_string(mode)), mode);
  EXPECT_THROW(eval::parse_ablation_mode("half"), ConfigError);
}

TEST(Ablation, LayerProfileAndOrder) {
  auto c = fixtures::toy_config(3, 8, 2, {});
  auto m = fixtures::lively_model<float>(c, 3, 5.0);
  std::mt19937_64 rng(4);
  std::vector<Image> imgs{fixtures::random_image(16, rng), fixtures::random_image(16, rng)};
  auto p = eval::mean_layer_profile(m, imgs, 2);
  ASSERT_EQ(p.signed_contribution.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_GE(p.absolute_contribution[l], std::abs(p.signed_contribution[l]) - 1e-9);

  eval::MeanLayerProfile hand{{0, 0, 0, 0}, {0.5, 2.0, 0.5, 1.0}};
  EXPECT_EQ(eval::contribution_order(hand), (std::vector<int>{1, 3, 2, 0}));
  EXPECT_EQ(eval::layer_profile_csv(hand).rfind("layer,signed,absolute\n0,", 0), 0u);
  std::vector<eval::AblationRow> rows{{"removed-none", {false}, 0.75}};
  EXPECT_EQ(eval::ablation_csv(rows), "setting,accuracy\nremoved-none,0.75\n");
}

TEST(Sanity, StagesAreCumulativeAndStartIdentical) {
  auto c = fixtures::toy_config(3, 8, 2, {1});
  auto m = fixtures::lively_model<float>(c, 5, 5.0);
  std::mt19937_64 rng(6);
  std::vector<Image> imgs{fixtures::random_image(16, rng), fixtures::random_image(16, rng), fixtures::random_image(16, rng)};
  auto before = m.clone();
  auto report = eval::cascading_randomization(m, imgs, eval::saliency_method("ledger"), 7, 2);
  ASSERT_EQ(report.stages.size(), 5u);
  EXPECT_EQ(report.stages[0].name, "none");
  EXPECT_EQ(report.stages[1].name, "head");
  EXPECT_EQ(report.stages[2].name, "block-2");
  EXPECT_EQ(report.stages[4].name, "block-0");
  EXPECT_NEAR(report.stages[0].spearman_abs, 1.0, 1e-12);
  EXPECT_NEAR(report.stages[0].pearson_abs, 1.0, 1e-12);
  EXPECT_LT(report.stages[4].spearman_abs, 0.99);
  for (std::size_t i = 0; i < before.named_parameters().size(); ++i)
    EXPECT_EQ(fixtures::max_abs_diff(before.named_parameters()[i].second.data(), m.named_parameters()[i].second.data()),
              0.0);
  auto again = eval::cascading_randomization(m, imgs, eval::saliency_method("ledger"), 7, 1);
  for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(again.stages[s].spearman_abs, report.stages[s].spearman_abs);
  EXPECT_EQ(eval::sanity_csv(report).rfind("stage,spearman_abs,pearson_abs\nnone,", 0), 0u);
}

TEST(Sanity, MethodsByName) {
  for (auto name : {"ledger", "rollout", "gradcam", "random"}) EXPECT_TRUE(eval::is_saliency_method(name));
  EXPECT_FALSE(eval::is_saliency_method("lime"));
  EXPECT_THROW(eval::saliency_method("lime"), ConfigError);
  auto c = fixtures::toy_config(2, 8, 2, {});
  auto m = model::HitModel<float>::initialized(c, 8);
  auto rnd = eval::saliency_method("random", -1, 10);
  Image img(16, 16);
  EXPECT_EQ(rnd(m, img, 0, 3).values, posthoc::random_map(4, 13).values);
  EXPECT_EQ(eval::saliency_method("rollout")(m, img, 0, 0).side, 4u);
}
