#include <gtest/gtest.h>

#include <cmath>

#include "hit/train/optimizer.hpp"

using namespace hit;
using ad::Shape;
using ad::Tensor;

TEST(AdamW, FirstStepByHand) {
  Tensor<double> w(Shape{1}, 1.0), b(Shape{1}, 1.0);
  model::NamedTensors<double> params{{"blocks.0.mlp.fc1.weight", w}, {"blocks.0.mlp.fc1.bias", b}};
  train::AdamW<double> opt(params, {0.9, 0.999, 1e-8, 0.05});
  w.grad()[0] = 0.5;
  b.grad()[0] = 0.5;
  opt.step(0.1);
  // m_hat = 0.5, v_hat = 0.25, so the Adam step is 0.5 / (0.5 + 1e-8).
  const double adam = 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(w[0], 1.0 - 0.1 * 0.05 * 1.0 - 0.1 * adam, 1e-12);
  EXPECT_NEAR(b[0], 1.0 - 0.1 * adam, 1e-12);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(AdamW, SecondStepByHand) {
  Tensor<double> w(Shape{1}, 0.0);
  model::NamedTensors<double> params{{"head.bias", w}};
  train::AdamW<double> opt(params, {0.9, 0.999, 1e-8, 0.0});
  w.grad()[0] = 1.0;
  opt.step(0.01);
  opt.zero_grad();
  w.grad()[0] = -2.0;
  opt.step(0.01);
  const double m = 0.9 * 0.1 + 0.1 * -2.0, v = 0.999 * 0.001 + 0.001 * 4.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(w[0], -0.01 * (1.0 / (1.0 + 1e-8)) - 0.01 * mh / (std::sqrt(vh) + 1e-8), 1e-12);
}

TEST(AdamW, ZeroGradClears) {
  Tensor<float> w(Shape{3}, 1.0f);
  train::AdamW<float> opt({{"x.wq", w}}, {});
  w.grad()[1] = 3.0f;
  opt.zero_grad();
  for (float g : w.grad()) EXPECT_EQ(g, 0.0f);
}

TEST(Schedule, WarmupThenCosineToOneHundredth) {
  EXPECT_NEAR(train::scheduled_lr(0, 100, 10, 1.0), 0.1, 1e-12);
  EXPECT_NEAR(train::scheduled_lr(9, 100, 10, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(train::scheduled_lr(10, 100, 10, 1.0), 1.0, 1e-9);
  EXPECT_NEAR(train::scheduled_lr(100, 100, 10, 1.0), 0.01, 1e-9);
  EXPECT_NEAR(train::scheduled_lr(55, 100, 10, 1.0), 0.01 + 0.99 * 0.5, 1e-9);
  double prev = 2.0;
  for (std::size_t s = 10; s <= 100; ++s) {
    const double lr = train::scheduled_lr(s, 100, 10, 1.0);
    EXPECT_LE(lr, prev + 1e-15);
    prev = lr;
  }
  EXPECT_NEAR(train::scheduled_lr(0, 50, 0, 2.0), 2.0, 1e-12);
}
