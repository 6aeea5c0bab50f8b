#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "hit/ad/tape.hpp"
#include "hit/ad/tensor.hpp"

// Differentiable operations. Each op computes its result eagerly and, when
// a Tape is recording on this thread and any input requires a gradient,
// appends its adjoint to that tape.
namespace hit::ad {

template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> scale(const Tensor<T>& a, T factor);

/// x[..., n] + row[n], broadcast over every leading index.
template <class T> Tensor<T> add_row_vector(const Tensor<T>& x, const Tensor<T>& row);
/// x[(r*k) x n] + tile[k x n], the tile repeated r times down the rows.
template <class T> Tensor<T> add_tiled(const Tensor<T>& x, const Tensor<T>& tile);
/// row[n] -> [count x n].
template <class T> Tensor<T> broadcast_rows(const Tensor<T>& row, std::size_t count);
template <class T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);

/// a[m x k] . b[k x n]. Throws DimensionError naming both shapes.
template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
/// x[..., k] . w[k x n] + bias[n]; `bias` may be undefined.
template <class T> Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);

template <class T> Tensor<T> sum(const Tensor<T>& x);
template <class T> Tensor<T> mean(const Tensor<T>& x);
template <class T> Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b);

/// Numerically stable softmax along `axis` (negative counts from the end).
template <class T> Tensor<T> softmax(const Tensor<T>& x, int axis = -1);
/// Normalizes each length-d row of x[..., d], then applies gamma/beta.
template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);
/// tanh-approximated GELU.
template <class T> Tensor<T> gelu(const Tensor<T>& x);

/// Mean of each non-overlapping 2x2 block of grid[..., H, W, d].
template <class T> Tensor<T> avg_pool2(const Tensor<T>& grid);
/// Adjoint of avg_pool2: each entry copied over its 2x2 block, divided by 4.
template <class T> Tensor<T> avg_pool2_transpose(const Tensor<T>& grid);

/// Mean over the batch of cross-entropy against uniformly smoothed targets.
template <class T>
Tensor<T> cross_entropy_smoothed(const Tensor<T>& logits, std::span<const int> targets, double smoothing);

/// Inverted dropout; returns `x` itself when not training or p == 0.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, std::mt19937_64& rng);

/// Scaled dot products of one query per sample against that sample's M keys,
/// split over `heads`: q[B x d], k[(B*M) x d] -> [B x heads x M].
template <class T>
Tensor<T> cls_attention_scores(const Tensor<T>& q, const Tensor<T>& k, std::size_t heads);
/// Per-head weighted sum of values, heads concatenated:
/// p[B x heads x M], v[(B*M) x d] -> [B x d].
template <class T>
Tensor<T> cls_attention_mix(const Tensor<T>& p, const Tensor<T>& v, std::size_t heads);

}  // namespace hit::ad
