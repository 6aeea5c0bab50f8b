#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hit/ad/tensor.hpp"
#include "hit/model/config.hpp"

namespace hit::model {

using ad::Tensor;

/// Weights of one attention layer. Projections are stored input-major
/// ([in x out]); head i owns columns [i*dk, (i+1)*dk) of wq/wk/wv and the
/// matching rows of wo.
template <class T>
struct AttentionParams {
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
  int heads = 1;
};

template <class T>
struct BlockParams {
  Tensor<T> norm1_gamma, norm1_beta;
  AttentionParams<T> attn;
  bool has_mlp = true;
  Tensor<T> norm2_gamma, norm2_beta;
  Tensor<T> fc1_w, fc1_b, fc2_w, fc2_b;
};

template <class T>
struct HitParams {
  Tensor<T> patch_w;  // [3*p*p x d]
  Tensor<T> patch_b;  // [d]
  Tensor<T> pos;      // [N*N x d], added to patch tokens only
  Tensor<T> cls;      // [d], the initial CLS x_0[0]
  std::vector<BlockParams<T>> blocks;
  Tensor<T> head_norm_gamma, head_norm_beta;  // undefined when final LN is disabled
  Tensor<T> head_w;                           // [d x C]
  Tensor<T> head_b;                           // [C]
};

template <class T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

/// Allocates every parameter: weights and biases zero, LayerNorm gains one.
template <class T>
HitParams<T> make_params(const HitConfig& config);

/// DeiT-style initialisation: weights, positional embedding and initial CLS
/// drawn from N(0, 0.02^2) truncated at two standard deviations; biases
/// zero; LayerNorm gain one and shift zero.
template <class T>
void init_params(HitParams<T>& params, std::mt19937_64& rng);
template <class T>
void init_block(BlockParams<T>& block, std::mt19937_64& rng);
template <class T>
void init_head(HitParams<T>& params, std::mt19937_64& rng);

/// Stable, fully qualified names ("blocks.3.attn.wq", ...) in a fixed order.
template <class T>
NamedTensors<T> named_parameters(const HitParams<T>& params);

/// Whether weight decay applies (matrices only; no biases, norms, embeddings).
bool decays(const std::string& parameter_name);

void fill_trunc_normal(std::span<float> values, double stddev, std::mt19937_64& rng);
void fill_trunc_normal(std::span<double> values, double stddev, std::mt19937_64& rng);


/// Visits every tensor field of `params` in named_parameters() order.
template <class T, class Fn>
void for_each_tensor(HitParams<T>& p, Fn&& fn) {
  fn(p.cls);
  fn(p.pos);
  fn(p.patch_w);
  fn(p.patch_b);
  for (auto& b : p.blocks) {
    for (Tensor<T>* t : {&b.norm1_gamma, &b.norm1_beta, &b.attn.wq, &b.attn.bq, &b.attn.wk, &b.attn.bk,
                         &b.attn.wv, &b.attn.bv, &b.attn.wo, &b.attn.bo})
      fn(*t);
    if (b.has_mlp)
      for (Tensor<T>* t : {&b.norm2_gamma, &b.norm2_beta, &b.fc1_w, &b.fc1_b, &b.fc2_w, &b.fc2_b}) fn(*t);
  }
  if (p.head_norm_gamma.defined()) {
    fn(p.head_norm_gamma);
    fn(p.head_norm_beta);
  }
  fn(p.head_w);
  fn(p.head_b);
}

}  // namespace hit::model
