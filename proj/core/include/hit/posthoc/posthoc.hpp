#pragma once

#include <cstdint>

#include "hit/attribution/saliency.hpp"
#include "hit/model/hit_model.hpp"

namespace hit::posthoc {

using attribution::SaliencyMap;
using ad::Tensor;

/// Rollout adapted to single-query attention: per layer the head-mean CLS
/// attention row is spread back onto the finest grid, then the layers are
/// averaged. No residual identity term is added.
SaliencyMap rollout_hit(const model::AttentionTrace& trace);

template <class T>
SaliencyMap rollout_hit(const model::HitModel<T>& model, const Image& image);

/// d logit_c / d tokens entering block `layer`, as [M x d].
template <class T>
Tensor<T> gradcam_gradient(const model::HitModel<T>& model, const Image& image, int class_index, int layer);

/// GradCAM on the grid entering block `layer` (default -1: the last block):
/// channel weights are the spatial mean of the logit gradient, each cell is
/// ReLU(sum_k alpha_k * token_k), upsampled to the finest grid.
template <class T>
SaliencyMap gradcam_hit(const model::HitModel<T>& model, const Image& image, int class_index, int layer = -1);

/// i.i.d. U[0, 1) cells from a seeded generator.
SaliencyMap random_map(std::size_t side, std::uint64_t seed);

}  // namespace hit::posthoc
