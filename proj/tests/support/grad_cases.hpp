#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hit/ad/grad_check.hpp"
#include "hit/ad/ops.hpp"
#include "support/test_support.hpp"

namespace hit::fixtures {

/// One differentiable op wrapped as a scalar function of a single input,
/// with every other operand frozen.
struct GradCase {
  std::string name;
  ad::Tensor<double> input;
  std::function<ad::Tensor<double>(const ad::Tensor<double>&)> f;
};

using CaseFactory = std::function<GradCase(std::mt19937_64&)>;

namespace detail {

using T = ad::Tensor<double>;

// Projects an op output onto fixed random weights so every output entry
// carries a distinct cotangent.
inline std::function<T(const T&)> projected(std::function<T(const T&)> op, ad::Shape out_shape,
                                            std::mt19937_64& rng) {
  T weights = random_tensor<double>(std::move(out_shape), rng);
  return [op = std::move(op), weights](const T& x) { return ad::dot(op(x), weights); };
}

}  // namespace detail

/// Every differentiable op, each input position it has.
inline std::vector<std::pair<std::string, CaseFactory>> grad_cases() {
  using detail::projected;
  using detail::T;
  using ad::Shape;
  std::vector<std::pair<std::string, CaseFactory>> cases;
  auto add = [&](std::string name, CaseFactory f) { cases.emplace_back(std::move(name), std::move(f)); };

  add("add", [](auto& rng) {
    T b = random_tensor<double>({3, 4}, rng);
    return GradCase{"add", random_tensor<double>({3, 4}, rng),
                    projected([b](const T& x) { return ad::add(x, b); }, {3, 4}, rng)};
  });
  add("sub.rhs", [](auto& rng) {
    T a = random_tensor<double>({3, 4}, rng);
    return GradCase{"sub.rhs", random_tensor<double>({3, 4}, rng),
                    projected([a](const T& x) { return ad::sub(a, x); }, {3, 4}, rng)};
  });
  add("mul", [](auto& rng) {
    T b = random_tensor<double>({5}, rng);
    return GradCase{"mul", random_tensor<double>({5}, rng),
                    projected([b](const T& x) { return ad::mul(x, ad::mul(x, b)); }, {5}, rng)};
  });
  add("scale", [](auto& rng) {
    return GradCase{"scale", random_tensor<double>({4}, rng),
                    projected([](const T& x) { return ad::scale(x, -1.7); }, {4}, rng)};
  });
  add("add_row_vector.row", [](auto& rng) {
    T x0 = random_tensor<double>({2, 3, 4}, rng);
    return GradCase{"add_row_vector.row", random_tensor<double>({4}, rng),
                    projected([x0](const T& r) { return ad::add_row_vector(x0, r); }, {2, 3, 4}, rng)};
  });
  add("add_tiled.tile", [](auto& rng) {
    T x0 = random_tensor<double>({6, 3}, rng);
    return GradCase{"add_tiled.tile", random_tensor<double>({2, 3}, rng),
                    projected([x0](const T& t) { return ad::add_tiled(x0, t); }, {6, 3}, rng)};
  });
  add("broadcast_rows", [](auto& rng) {
    return GradCase{"broadcast_rows", random_tensor<double>({3}, rng),
                    projected([](const T& r) { return ad::broadcast_rows(r, 4); }, {4, 3}, rng)};
  });
  add("reshape", [](auto& rng) {
    return GradCase{"reshape", random_tensor<double>({2, 6}, rng),
                    projected([](const T& x) { return ad::reshape(x, Shape{3, 4}); }, {3, 4}, rng)};
  });
  add("matmul.lhs", [](auto& rng) {
    T b = random_tensor<double>({4, 2}, rng);
    return GradCase{"matmul.lhs", random_tensor<double>({3, 4}, rng),
                    projected([b](const T& a) { return ad::matmul(a, b); }, {3, 2}, rng)};
  });
  add("matmul.rhs", [](auto& rng) {
    T a = random_tensor<double>({3, 4}, rng);
    return GradCase{"matmul.rhs", random_tensor<double>({4, 2}, rng),
                    projected([a](const T& b) { return ad::matmul(a, b); }, {3, 2}, rng)};
  });
  add("linear.input", [](auto& rng) {
    T w = random_tensor<double>({4, 3}, rng);
    T b = random_tensor<double>({3}, rng);
    return GradCase{"linear.input", random_tensor<double>({2, 2, 4}, rng),
                    projected([w, b](const T& x) { return ad::linear(x, w, b); }, {2, 2, 3}, rng)};
  });
  add("linear.weight", [](auto& rng) {
    T x = random_tensor<double>({5, 4}, rng);
    T b = random_tensor<double>({3}, rng);
    return GradCase{"linear.weight", random_tensor<double>({4, 3}, rng),
                    projected([x, b](const T& w) { return ad::linear(x, w, b); }, {5, 3}, rng)};
  });
  add("linear.bias", [](auto& rng) {
    T x = random_tensor<double>({5, 4}, rng);
    T w = random_tensor<double>({4, 3}, rng);
    return GradCase{"linear.bias", random_tensor<double>({3}, rng),
                    projected([x, w](const T& b) { return ad::linear(x, w, b); }, {5, 3}, rng)};
  });
  add("sum", [](auto& rng) {
    return GradCase{"sum", random_tensor<double>({3, 2}, rng), [](const T& x) { return ad::sum(ad::mul(x, x)); }};
  });
  add("mean", [](auto& rng) {
    return GradCase{"mean", random_tensor<double>({3, 2}, rng), [](const T& x) { return ad::mean(ad::mul(x, x)); }};
  });
  add("dot", [](auto& rng) {
    T b = random_tensor<double>({6}, rng);
    return GradCase{"dot", random_tensor<double>({6}, rng), [b](const T& x) { return ad::dot(x, b); }};
  });
  add("softmax.last", [](auto& rng) {
    return GradCase{"softmax.last", random_tensor<double>({3, 5}, rng),
                    projected([](const T& x) { return ad::softmax(x, -1); }, {3, 5}, rng)};
  });
  add("softmax.first", [](auto& rng) {
    return GradCase{"softmax.first", random_tensor<double>({4, 3}, rng),
                    projected([](const T& x) { return ad::softmax(x, 0); }, {4, 3}, rng)};
  });
  add("layer_norm.input", [](auto& rng) {
    T g = random_tensor<double>({5}, rng);
    T b = random_tensor<double>({5}, rng);
    return GradCase{"layer_norm.input", random_tensor<double>({3, 5}, rng),
                    projected([g, b](const T& x) { return ad::layer_norm(x, g, b, 1e-6); }, {3, 5}, rng)};
  });
  add("layer_norm.gamma", [](auto& rng) {
    T x = random_tensor<double>({3, 5}, rng);
    T b = random_tensor<double>({5}, rng);
    return GradCase{"layer_norm.gamma", random_tensor<double>({5}, rng),
                    projected([x, b](const T& g) { return ad::layer_norm(x, g, b, 1e-6); }, {3, 5}, rng)};
  });
  add("layer_norm.beta", [](auto& rng) {
    T x = random_tensor<double>({3, 5}, rng);
    T g = random_tensor<double>({5}, rng);
    return GradCase{"layer_norm.beta", random_tensor<double>({5}, rng),
                    projected([x, g](const T& b) { return ad::layer_norm(x, g, b, 1e-6); }, {3, 5}, rng)};
  });
  add("gelu", [](auto& rng) {
    return GradCase{"gelu", random_tensor<double>({7}, rng, 2.0),
                    projected([](const T& x) { return ad::gelu(x); }, {7}, rng)};
  });
  add("avg_pool2", [](auto& rng) {
    return GradCase{"avg_pool2", random_tensor<double>({2, 4, 4, 2}, rng),
                    projected([](const T& x) { return ad::avg_pool2(x); }, {2, 2, 2, 2}, rng)};
  });
  add("avg_pool2_transpose", [](auto& rng) {
    return GradCase{"avg_pool2_transpose", random_tensor<double>({2, 2, 3}, rng),
                    projected([](const T& x) { return ad::avg_pool2_transpose(x); }, {4, 4, 3}, rng)};
  });
  add("cross_entropy_smoothed", [](auto& rng) {
    std::vector<int> targets{2, 0, 1};
    return GradCase{"cross_entropy_smoothed", random_tensor<double>({3, 4}, rng, 2.0), [targets](const T& z) {
                      return ad::cross_entropy_smoothed(z, std::span<const int>(targets), 0.1);
                    }};
  });
  add("dropout", [](auto& rng) {
    const auto seed = rng();
    return GradCase{"dropout", random_tensor<double>({10}, rng), projected(
                                                                     [seed](const T& x) {
                                                                       std::mt19937_64 mask_rng(seed);
                                                                       return ad::dropout(x, 0.3, true, mask_rng);
                                                                     },
                                                                     {10}, rng)};
  });
  add("cls_attention_scores.query", [](auto& rng) {
    T k = random_tensor<double>({6, 4}, rng);
    return GradCase{"cls_attention_scores.query", random_tensor<double>({2, 4}, rng),
                    projected([k](const T& q) { return ad::cls_attention_scores(q, k, 2); }, {2, 2, 3}, rng)};
  });
  add("cls_attention_scores.keys", [](auto& rng) {
    T q = random_tensor<double>({2, 4}, rng);
    return GradCase{"cls_attention_scores.keys", random_tensor<double>({6, 4}, rng),
                    projected([q](const T& k) { return ad::cls_attention_scores(q, k, 2); }, {2, 2, 3}, rng)};
  });
  add("cls_attention_mix.weights", [](auto& rng) {
    T v = random_tensor<double>({6, 4}, rng);
    return GradCase{"cls_attention_mix.weights", random_tensor<double>({2, 2, 3}, rng),
                    projected([v](const T& p) { return ad::cls_attention_mix(p, v, 2); }, {2, 4}, rng)};
  });
  add("cls_attention_mix.values", [](auto& rng) {
    T p = random_tensor<double>({2, 2, 3}, rng);
    return GradCase{"cls_attention_mix.values", random_tensor<double>({6, 4}, rng),
                    projected([p](const T& v) { return ad::cls_attention_mix(p, v, 2); }, {2, 4}, rng)};
  });
  return cases;
}

}  // namespace hit::fixtures
