#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hit/error.hpp"
#include "hit/eval/correlation.hpp"

using namespace hit;

TEST(Correlation, SpearmanOfOneSwap) {
  std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  EXPECT_NEAR(eval::spearman_abs(a, b), 0.8, 1e-12);
}

TEST(Correlation, AverageRanksShareTies) {
  std::vector<double> v{10, 20, 20, 5, 20};
  EXPECT_EQ(eval::average_ranks(v), (std::vector<double>{2, 4, 4, 1, 4}));
}

TEST(Correlation, ReversedOrderHasUnitMagnitude) {
  std::vector<double> a{1, 2, 3, 4, 5}, b{9, 7, 5, 3, 1};
  EXPECT_NEAR(eval::spearman_abs(a, b), 1.0, 1e-12);
  EXPECT_NEAR(eval::pearson_abs(a, b), 1.0, 1e-12);
}

TEST(Correlation, SpearmanIgnoresMonotoneTransforms) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(20), b(20), e(20);
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = n(rng);
      b[i] = a[i] + n(rng);
      e[i] = std::exp(3.0 * b[i]);
    }
    EXPECT_NEAR(eval::spearman_abs(a, b), eval::spearman_abs(a, e), 1e-12);
    EXPECT_NEAR(eval::pearson_abs(a, b), eval::pearson_abs(b, a), 1e-12);
    EXPECT_LE(eval::pearson_abs(a, b), 1.0 + 1e-12);
  }
}

TEST(Correlation, PearsonAgainstClosedForm) {
  std::vector<double> a{1, 2, 3, 4}, b{2, 1, 4, 3};
  // means 2.5; cov = (-1.5*-0.5 + -0.5*-1.5 + 0.5*1.5 + 1.5*0.5) = 3; var = 5 each
  EXPECT_NEAR(eval::pearson_abs(a, b), 3.0 / 5.0, 1e-12);
}

TEST(Correlation, ZeroVarianceGivesZero) {
  std::vector<double> a{1, 1, 1}, b{1, 2, 3};
  EXPECT_EQ(eval::pearson_abs(a, b), 0.0);
  EXPECT_EQ(eval::spearman_abs(a, b), 0.0);
}

TEST(Correlation, BadSizesThrow) {
  std::vector<double> a{1, 2, 3}, b{1, 2}, one{1};
  EXPECT_THROW(eval::pearson_abs(a, b), DimensionError);
  EXPECT_THROW(eval::spearman_abs(one, one), DimensionError);
}
