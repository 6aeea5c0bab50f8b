#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hit/error.hpp"
#include "hit/eval/corruption.hpp"
#include "support/test_support.hpp"

using namespace hit;

namespace {

int reflect101(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

}  // namespace

TEST(Corruption, ZeroBlanksEveryPixel) {
  std::mt19937_64 rng(1);
  auto z = eval::corrupt_zero(fixtures::random_image(8, rng));
  EXPECT_EQ(z.width, 8);
  for (float v : z.pixels) EXPECT_EQ(v, 0.0f);
}

TEST(Corruption, KernelMatchesGaussianFormula) {
  auto k = eval::gaussian_kernel(5.0, 11);
  ASSERT_EQ(k.size(), 11u);
  double z = 0.0;
  for (int i = -5; i <= 5; ++i) z += std::exp(-i * i / 50.0);
  for (int i = -5; i <= 5; ++i) EXPECT_NEAR(k[static_cast<std::size_t>(i + 5)], std::exp(-i * i / 50.0) / z, 1e-15);
  EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
  EXPECT_THROW(eval::gaussian_kernel(5.0, 10), ConfigError);
  EXPECT_THROW(eval::gaussian_kernel(0.0, 11), ConfigError);
}

TEST(Corruption, BlurOfImpulseIsTheKernelOuterProduct) {
  Image img(21, 21);
  img.at(10, 10, 1) = 1.0f;
  auto b = eval::corrupt_blur(img, 5.0, 11);
  auto k = eval::gaussian_kernel(5.0, 11);
  double total = 0.0;
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const int dy = y - 10, dx = x - 10;
      const double expect = (std::abs(dy) <= 5 && std::abs(dx) <= 5)
                                ? k[static_cast<std::size_t>(dy + 5)] * k[static_cast<std::size_t>(dx + 5)]
                                : 0.0;
      EXPECT_NEAR(b.at(y, x, 1), expect, 1e-6);
      EXPECT_EQ(b.at(y, x, 0), 0.0f);
      total += b.at(y, x, 1);
    }
  EXPECT_NEAR(total, 1.0, 1e-5);
}

TEST(Corruption, BlurMatchesDirectTwoDimensionalConvolution) {
  std::mt19937_64 rng(2);
  Image img = fixtures::random_image(9, rng);
  auto b = eval::corrupt_blur(img, 2.0, 5);
  auto k = eval::gaussian_kernel(2.0, 5);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx)
            acc += k[static_cast<std::size_t>(dy + 2)] * k[static_cast<std::size_t>(dx + 2)] *
                   img.at(reflect101(y + dy, 9), reflect101(x + dx, 9), ch);
        EXPECT_NEAR(b.at(y, x, ch), acc, 1e-5) << y << "," << x;
      }
}

TEST(Corruption, BlurKeepsConstantImages) {
  Image img(16, 16);
  for (auto& p : img.pixels) p = 0.3f;
  auto b = eval::corrupt(img, eval::Corruption::kBlur);
  for (float v : b.pixels) EXPECT_NEAR(v, 0.3f, 1e-6);
}

TEST(Corruption, NamesRoundTrip) {
  for (auto c : {eval::Corruption::kZero, eval::Corruption::kBlur})
    EXPECT_EQ(eval::parse_corruption(eval::to_string(c)), c);
  EXPECT_THROW(eval::parse_corruption("noise"), ConfigError);
}
