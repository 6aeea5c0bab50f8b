#include <gtest/gtest.h>

#include <cmath>

#include "hit/model/fold.hpp"
#include "support/test_support.hpp"

using namespace hit;
using model::FinalLnMode;

namespace {

template <class T>
std::vector<double> folded_total(const model::FoldedLogits<T>& f) {
  std::vector<double> total(f.logits.numel(), 0.0);
  for (const auto& layer : f.per_entry) {
    const std::size_t classes = total.size();
    for (std::size_t i = 0; i < layer.numel(); ++i) total[i % classes] += layer[i];
  }
  return total;
}

}  // namespace

TEST(Fold, EntriesSumToModelLogitsDouble) {
  auto c = fixtures::toy_config(4, 16, 4, {2});
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    auto m = fixtures::lively_model<double>(c, 2 + static_cast<std::uint64_t>(trial), 10.0);
    auto r = model::forward_with_ledger(m, fixtures::random_image(16, rng));
    auto f = model::fold_final_layernorm(r.ledger, m.params(), c);
    auto total = folded_total(f);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(total[k], r.logits[k], 1e-9);
      EXPECT_NEAR(f.logits[k], r.logits[k], 1e-9);
    }
  }
}

TEST(Fold, FloatModelAgreesWithinTolerance) {
  auto c = fixtures::toy_config(4, 16, 2, {});
  auto m = fixtures::lively_model<float>(c, 9, 10.0);
  std::mt19937_64 rng(10);
  auto r = model::forward_with_ledger(m, fixtures::random_image(16, rng));
  auto f = model::fold_final_layernorm(r.ledger, m.params(), c);
  auto total = folded_total(f);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_NEAR(total[k], r.logits[k], 1e-4 * std::max(1.0, std::abs(static_cast<double>(r.logits[k]))));
}

TEST(Fold, StatisticsAreThoseOfTheFinalCls) {
  auto c = fixtures::toy_config(2, 8, 2, {});
  auto m = fixtures::lively_model<double>(c, 11, 5.0);
  std::mt19937_64 rng(12);
  auto r = model::forward_with_ledger(m, fixtures::random_image(16, rng));
  auto f = model::fold_final_layernorm(r.ledger, m.params(), c);
  double mean = 0.0, var = 0.0;
  for (double v : r.final_cls.data()) mean += v / 8.0;
  for (double v : r.final_cls.data()) var += (v - mean) * (v - mean) / 8.0;
  EXPECT_NEAR(f.mu, mean, 1e-12);
  EXPECT_NEAR(f.sigma, std::sqrt(var + c.ln_eps), 1e-12);
}

TEST(Fold, DisabledLayerNormIsPlainLinear) {
  auto c = fixtures::toy_config(3, 8, 2, {1});
  c.final_ln_mode = FinalLnMode::kDisable;
  auto m = fixtures::lively_model<double>(c, 13, 5.0);
  std::mt19937_64 rng(14);
  auto r = model::forward_with_ledger(m, fixtures::random_image(16, rng));
  auto f = model::fold_final_layernorm(r.ledger, m.params(), c);
  const std::size_t k_total = r.ledger.entry_count();
  const auto& w = m.params().head_w;
  const auto& e = r.ledger.entries[0];
  for (std::size_t k = 0; k < 3; ++k) {
    double expect = m.params().head_b[k] / static_cast<double>(k_total);
    for (std::size_t j = 0; j < 8; ++j) expect += e[j] * w[j * 3 + k];
    EXPECT_NEAR(f.per_entry[0][k], expect, 1e-12);
  }
  auto total = folded_total(f);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(total[k], r.logits[k], 1e-9);
}

TEST(Fold, ShapesFollowTheLedger) {
  auto c = fixtures::toy_config(4, 8, 2, {1, 3});
  auto m = fixtures::lively_model<float>(c, 15, 5.0);
  auto r = model::forward_with_ledger(m, Image(16, 16));
  auto f = model::fold_final_layernorm(r.ledger, m.params(), c);
  ASSERT_EQ(f.per_entry.size(), 4u);
  EXPECT_EQ(f.per_entry[0].shape(), (ad::Shape{16, 3}));
  EXPECT_EQ(f.per_entry[1].shape(), (ad::Shape{4, 3}));
  EXPECT_EQ(f.per_entry[3].shape(), (ad::Shape{1, 3}));
}
