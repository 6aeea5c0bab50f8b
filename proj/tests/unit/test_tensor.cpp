#include <gtest/gtest.h>

#include "hit/ad/tensor.hpp"
#include "hit/error.hpp"

using hit::ad::Shape;
using hit::ad::Tensor;

TEST(Tensor, ElementCountIsProductOfShape) {
  Tensor<float> t(Shape{2, 3, 4});
  EXPECT_EQ(t.numel(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.dim(1), 3u);
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Tensor, RejectsEmptyAndZeroDims) {
  EXPECT_THROW(Tensor<float>(Shape{}), hit::DimensionError);
  EXPECT_THROW(Tensor<float>(Shape{3, 0}), hit::DimensionError);
  EXPECT_THROW(Tensor<float>(Shape{2, 2}, std::vector<float>{1, 2, 3}), hit::DimensionError);
}

TEST(Tensor, CopiesShareStorageButCloneDoesNot) {
  auto a = Tensor<double>::of({2}, {1.0, 2.0});
  Tensor<double> alias = a;
  Tensor<double> deep = a.clone();
  a[0] = 5.0;
  EXPECT_EQ(alias[0], 5.0);
  EXPECT_EQ(deep[0], 1.0);
  EXPECT_TRUE(alias.same_node(a));
  EXPECT_FALSE(deep.same_node(a));
}

TEST(Tensor, GradientSlotMatchesShapeAndIsLazy) {
  Tensor<float> t(Shape{3, 2});
  EXPECT_FALSE(t.has_grad());
  EXPECT_TRUE(std::as_const(t).grad().empty());
  auto g = t.grad();
  EXPECT_EQ(g.size(), t.numel());
  EXPECT_TRUE(t.has_grad());
  g[1] = 3.0f;
  t.zero_grad();
  EXPECT_EQ(t.grad()[1], 0.0f);
}

TEST(Tensor, ShareValuesKeepsPrivateGradient) {
  auto a = Tensor<float>::of({2}, {1.0f, 2.0f});
  a.grad()[0] = 7.0f;
  auto b = a.share_values();
  EXPECT_FALSE(b.has_grad());
  b.grad()[0] = 1.0f;
  EXPECT_EQ(a.grad()[0], 7.0f);
  a[1] = 9.0f;
  EXPECT_EQ(b[1], 9.0f);
}

TEST(Tensor, ViewReshapesWithoutCopying) {
  auto a = Tensor<float>::of({2, 2}, {1, 2, 3, 4});
  auto v = a.view(Shape{4});
  EXPECT_EQ(v.rank(), 1u);
  a[3] = 10.0f;
  EXPECT_EQ(v[3], 10.0f);
  EXPECT_THROW(a.view(Shape{3}), hit::DimensionError);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_EQ(Tensor<float>::scalar(2.5f).item(), 2.5f);
  EXPECT_THROW(Tensor<float>(Shape{2}).item(), hit::ContractError);
}

TEST(Tensor, CastConvertsPrecision) {
  auto a = Tensor<double>::of({2}, {0.1, -3.0});
  auto f = hit::ad::cast<float>(a);
  EXPECT_EQ(f.shape(), a.shape());
  EXPECT_FLOAT_EQ(f[0], 0.1f);
}
