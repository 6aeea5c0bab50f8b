#pragma once

#include <vector>

#include "hit/model/hit_model.hpp"

namespace hit::model {

/// Class logits carried by every ledger entry once the final LayerNorm and
/// classifier have been pushed through the sum.
template <class T>
struct FoldedLogits {
  std::vector<Tensor<T>> per_entry;  // layer l: [M_l x C]
  Tensor<T> logits;                  // [C], sum of all entries
  T mu = T(0);
  T sigma = T(1);
};

/// With the statistics (mu, sigma) of the final CLS held fixed, the final
/// LayerNorm is affine, so each entry e maps to
///   (e * gamma / sigma) W + ((beta - mu * gamma / sigma) W + b) / K
/// where K is the total entry count. With the final LayerNorm disabled the
/// mapping is e W + b / K.
template <class T>
FoldedLogits<T> fold_final_layernorm(const ContributionLedger<T>& ledger, const HitParams<T>& params,
                                     const HitConfig& config);

}  // namespace hit::model
