#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hit/error.hpp"
#include "hit/eval/curves.hpp"
#include "support/test_support.hpp"

using namespace hit;
using eval::CurveMode;
using eval::SaliencyMap;

namespace {

// Two classes; p(class 0) = (1 + mean red) / 2, so class 0 wins on any
// non-black image.
class MeanPredictor final : public eval::Predictor {
 public:
  std::vector<std::vector<double>> predict_proba(std::span<const Image> images) const override {
    std::vector<std::vector<double>> out;
    for (const auto& img : images) {
      double s = 0.0;
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) s += img.at(y, x, 0);
      const double p = 0.5 + 0.5 * s / (img.height * img.width);
      out.push_back({p, 1.0 - p});
    }
    return out;
  }
  int patch_size() const override { return 2; }
};

// 4x4 image, 2x2 patches; patch k filled with weight w[k].
Image weighted_image(const std::vector<double>& w) {
  Image img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(y, x, 0) = static_cast<float>(w[static_cast<std::size_t>((y / 2) * 2 + x / 2)]);
  return img;
}

SaliencyMap map_of(std::vector<double> v) {
  SaliencyMap m;
  m.side = 2;
  m.values = std::move(v);
  return m;
}

double trapezoid(const std::vector<double>& y) {
  double a = 0.0;
  const double h = 1.0 / static_cast<double>(y.size() - 1);
  for (std::size_t i = 1; i < y.size(); ++i) a += 0.5 * h * (y[i - 1] + y[i]);
  return a;
}

}  // namespace

TEST(Curves, RankCellsDescendingWithRowMajorTies) {
  EXPECT_EQ(eval::rank_cells(map_of({0.1, 0.9, 0.5, 0.9})), (std::vector<std::size_t>{1, 3, 2, 0}));
  EXPECT_EQ(eval::rank_cells(map_of({1, 1, 1, 1})), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Curves, ExhaustiveTwoByTwoOrders) {
  const std::vector<double> w{0.4, 0.1, 0.3, 0.2};
  MeanPredictor pred;
  const Image img = weighted_image(w);
  std::vector<std::size_t> perm{0, 1, 2, 3};
  int count = 0;
  do {
    // Map giving rank r to cell perm[r].
    std::vector<double> values(4);
    for (std::size_t r = 0; r < 4; ++r) values[perm[r]] = 4.0 - static_cast<double>(r);
    auto map = map_of(values);
    ASSERT_EQ(eval::rank_cells(map), perm);

    auto prob = [](double red_total) { return 0.5 + 0.5 * red_total / 4.0; };
    std::vector<double> ins{prob(0.0)}, del{prob(1.0)};  // weights sum to 1
    double in_acc = 0.0, del_acc = 1.0;
    for (std::size_t r = 0; r < 4; ++r) {
      in_acc += w[perm[r]];
      del_acc -= w[perm[r]];
      ins.push_back(prob(in_acc));
      del.push_back(prob(del_acc));
    }
    auto ci = eval::insertion_curve(pred, img, map, eval::Corruption::kZero);
    auto cd = eval::deletion_curve(pred, img, map, eval::Corruption::kZero);
    ASSERT_EQ(ci.probs.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(ci.fractions[i], i / 4.0, 1e-15);
      EXPECT_NEAR(ci.probs[i], ins[i], 1e-6);
      EXPECT_NEAR(cd.probs[i], del[i], 1e-6);
    }
    EXPECT_NEAR(eval::auc(ci), trapezoid(ins), 1e-6);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(count, 24);
}

TEST(Curves, BestOrderMaximizesInsertionArea) {
  const std::vector<double> w{0.4, 0.1, 0.3, 0.2};
  MeanPredictor pred;
  const Image img = weighted_image(w);
  auto best = eval::auc(eval::insertion_curve(pred, img, map_of(w), eval::Corruption::kZero));
  auto worst = eval::auc(eval::insertion_curve(pred, img, map_of({-0.4, -0.1, -0.3, -0.2}), eval::Corruption::kZero));
  EXPECT_GT(best, worst);
  auto del_best = eval::auc(eval::deletion_curve(pred, img, map_of(w), eval::Corruption::kZero));
  EXPECT_LT(del_best, eval::auc(eval::deletion_curve(pred, img, map_of({-0.4, -0.1, -0.3, -0.2}), eval::Corruption::kZero)));
}

TEST(Curves, SequenceEndpoints) {
  std::mt19937_64 rng(1);
  Image img = fixtures::random_image(4, rng);
  Image cor = eval::corrupt_zero(img);
  std::vector<std::size_t> order{2, 0, 3, 1};
  auto ins = eval::perturbation_sequence(img, cor, order, 2, CurveMode::kInsertion);
  auto del = eval::perturbation_sequence(img, cor, order, 2, CurveMode::kDeletion);
  ASSERT_EQ(ins.size(), 5u);
  EXPECT_EQ(ins.front().pixels, cor.pixels);
  EXPECT_EQ(ins.back().pixels, img.pixels);
  EXPECT_EQ(del.front().pixels, img.pixels);
  EXPECT_EQ(del.back().pixels, cor.pixels);
  // after one insertion step only cell 2 (rows 2-3, cols 0-1) is restored
  EXPECT_EQ(ins[1].at(2, 1, 0), img.at(2, 1, 0));
  EXPECT_EQ(ins[1].at(0, 0, 0), 0.0f);
}

TEST(Curves, AucAndNormalizedAuc) {
  eval::Curve c{{0.0, 0.5, 1.0}, {0.2, 0.6, 0.4}};
  EXPECT_NEAR(eval::auc(c), 0.25 * (0.2 + 0.6) + 0.25 * (0.6 + 0.4), 1e-15);
  auto n = eval::nauc(c);
  EXPECT_FALSE(n.degenerate);
  // normalized: 0, 1, 0.5
  EXPECT_NEAR(n.value, 0.25 * 1.0 + 0.25 * 1.5, 1e-12);
  auto flat = eval::nauc(eval::Curve{{0.0, 1.0}, {0.3, 0.3}});
  EXPECT_TRUE(flat.degenerate);
  EXPECT_EQ(flat.value, 0.5);
  EXPECT_THROW(eval::auc(eval::Curve{{0.0}, {1.0}}), ContractError);
}

TEST(Curves, NormalizedAucIsAffineInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    eval::Curve c;
    for (int i = 0; i <= 8; ++i) {
      c.fractions.push_back(i / 8.0);
      c.probs.push_back(u(rng));
    }
    auto scaled = c;
    for (auto& p : scaled.probs) p = 0.1 + 0.5 * p;
    EXPECT_NEAR(eval::nauc(c).value, eval::nauc(scaled).value, 1e-12);
    EXPECT_GE(eval::nauc(c).value, 0.0);
    EXPECT_LE(eval::nauc(c).value, 1.0);
  }
}

TEST(Curves, EvaluateAveragesPerImageCurvesDeterministically) {
  MeanPredictor pred;
  std::vector<Image> imgs{weighted_image({0.4, 0.1, 0.3, 0.2}), weighted_image({0.9, 0.8, 0.1, 0.6})};
  std::vector<SaliencyMap> maps{map_of({1, 2, 3, 4}), map_of({4, 3, 2, 1})};
  auto a = eval::evaluate_curves(pred, imgs, maps, CurveMode::kInsertion, eval::Corruption::kZero, "m", {}, 1);
  auto b = eval::evaluate_curves(pred, imgs, maps, CurveMode::kInsertion, eval::Corruption::kZero, "m", {}, 2);
  EXPECT_EQ(a.mean.probs, b.mean.probs);
  ASSERT_EQ(a.per_image.size(), 2u);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_NEAR(a.mean.probs[i], 0.5 * (a.per_image[0].probs[i] + a.per_image[1].probs[i]), 1e-15);
  EXPECT_NEAR(a.auc, eval::auc(a.mean), 1e-15);
  auto csv = eval::curve_csv(a);
  EXPECT_NE(csv.find("# mode=insertion"), std::string::npos);
  EXPECT_NE(csv.find("# corruption=zero"), std::string::npos);
  EXPECT_NE(csv.find("# method=m"), std::string::npos);
  EXPECT_NE(csv.find("fraction,mean_prob\n"), std::string::npos);
  maps.pop_back();
  EXPECT_THROW(eval::evaluate_curves(pred, imgs, maps, CurveMode::kInsertion, eval::Corruption::kZero, "m"),
               DimensionError);
}

TEST(Curves, ModeNamesRoundTrip) {
  for (auto m : {CurveMode::kInsertion, CurveMode::kDeletion}) EXPECT_EQ(eval::parse_curve_mode(eval::to_string(m)), m);
  EXPECT_THROW(eval::parse_curve_mode("sideways"), ConfigError);
}
