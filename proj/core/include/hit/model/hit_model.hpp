#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hit/ad/tensor.hpp"
#include "hit/io/image.hpp"
#include "hit/model/config.hpp"
#include "hit/model/params.hpp"

namespace hit::model {

/// Sequence state entering a block: the CLS vector plus the patch grid.
template <class T>
struct TokenState {
  int layer = 0;
  std::size_t side = 0;
  Tensor<T> cls;   // [d]
  Tensor<T> grid;  // [side x side x d]
};

/// CLS attention weights recorded during a forward pass.
struct AttentionTrace {
  std::size_t heads = 0;
  std::size_t input_side = 0;                 // patch grid side before any pooling
  std::vector<std::size_t> sides;             // grid side per layer
  std::vector<std::vector<double>> weights;   // layer -> [heads x side*side]
};

/// Per-layer, per-token vectors whose grand sum is the final CLS.
///
/// Entry n of layer l is v'_l(n) + b_o^l / M_l + x_0[0] / (L * M_l), where
/// M_l is the token count of layer l, so every layer carries exactly a
/// 1/L share of the initial CLS regardless of pooling.
template <class T>
struct ContributionLedger {
  std::size_t input_side = 0;  // patch grid side before any pooling
  std::vector<std::size_t> sides;
  std::vector<Tensor<T>> entries;      // layer l: [M_l x d]
  Tensor<T> initial_cls;               // x_0[0]
  std::vector<Tensor<T>> output_bias;  // b_o^l actually added (zero for dropped layers)

  std::size_t depth() const { return entries.size(); }
  std::size_t entry_count() const;
  /// Sum of every entry, layer by layer.
  Tensor<T> total() const;
};

struct ForwardOptions {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // attention-dropout source; required when training
  std::vector<bool> drop_layers;   // layers whose MHA output is not added to the CLS
  bool capture = false;            // keep per-layer tensors (attribution, GradCAM)
  /// When >= 0, the grid entering this block is detached into a leaf that
  /// requires gradients (read it back from the capture after backward).
  int grad_layer = -1;
};

template <class T>
struct LayerCapture {
  std::size_t side = 0;
  Tensor<T> grid;     // tokens entering the block, [B*M x d]
  Tensor<T> cls;      // CLS entering the block, [B x d]
  Tensor<T> weights;  // attention probabilities after dropout, [B x heads x M]
  Tensor<T> values;   // value projections, [B*M x d]
  bool dropped = false;
};

template <class T>
struct ForwardResult {
  Tensor<T> logits;     // [B x C]
  Tensor<T> final_cls;  // [B x d]
  std::vector<LayerCapture<T>> layers;
};

template <class T>
struct LedgerForward {
  Tensor<T> logits;     // [C]
  Tensor<T> final_cls;  // [d]
  ContributionLedger<T> ledger;
  AttentionTrace trace;
};

template <class T>
class HitModel {
 public:
  /// Zero weights, unit LayerNorm gains.
  explicit HitModel(HitConfig config);
  HitModel(HitConfig config, HitParams<T> params);
  static HitModel initialized(HitConfig config, std::uint64_t seed);

  const HitConfig& config() const noexcept { return config_; }
  HitParams<T>& params() noexcept { return params_; }
  const HitParams<T>& params() const noexcept { return params_; }
  NamedTensors<T> named_parameters() const { return model::named_parameters(params_); }

  /// Batched forward pass. Recorded on the active tape when parameters
  /// require gradients.
  ForwardResult<T> forward(std::span<const Image> images, const ForwardOptions& options = {}) const;

  /// Model sharing parameter values but owning separate gradient slots.
  HitModel replica() const;
  /// Deep copy (values duplicated).
  HitModel clone() const;
  template <class U>
  HitModel<U> cast() const;

 private:
  HitConfig config_;
  HitParams<T> params_;
};

/// Flattens image patches row by row into [(B*N*N) x 3*p*p]; each row is
/// (py, px, channel) ordered.
template <class T>
Tensor<T> extract_patches(std::span<const Image> images, const HitConfig& config);

template <class T>
TokenState<T> patch_embed(const Image& image, const HitModel<T>& model);

template <class T>
struct SingleQueryAttention {
  Tensor<T> output;     // [dk]
  Tensor<T> weights;    // [M]
  Tensor<T> per_token;  // [M x dk], rows sum to output
};
/// One attention head with a single query, written as a weighted sum of
/// per-token terms s(v) * (v W_V + b_V).
template <class T>
SingleQueryAttention<T> single_query_attention(const Tensor<T>& query, const Tensor<T>& keys_values,
                                               const AttentionParams<T>& params, int head);

template <class T>
struct MhaDecomposition {
  Tensor<T> output;     // [d] = bias + sum of per_token rows
  Tensor<T> per_token;  // [M x d]
  Tensor<T> bias;       // b_o
};
/// Multi-head attention for one query, unrolled into per-token vectors by
/// splitting the output projection into per-head row blocks.
template <class T>
MhaDecomposition<T> mha_cls(const Tensor<T>& query, const Tensor<T>& keys_values, const AttentionParams<T>& params);

template <class T>
struct BlockOutput {
  TokenState<T> state;
  Tensor<T> per_token;  // [M x d] attention contributions to the CLS
};
/// cls += MHA(LN(cls), LN(grid)); grid += MLP(LN(grid)) token-wise.
template <class T>
BlockOutput<T> hit_block(const TokenState<T>& state, const BlockParams<T>& block, const HitConfig& config);

/// 2x2 average pooling of the grid; the CLS is untouched.
template <class T>
TokenState<T> pool_tokens(const TokenState<T>& state);

/// Inference forward pass that also unrolls the CLS into its ledger.
template <class T>
std::vector<LedgerForward<T>> forward_with_ledger(const HitModel<T>& model, std::span<const Image> images,
                                                  const ForwardOptions& options = {});
template <class T>
LedgerForward<T> forward_with_ledger(const HitModel<T>& model, const Image& image, const ForwardOptions& options = {});

extern template class HitModel<float>;
extern template class HitModel<double>;

}  // namespace hit::model
