#include "hit/model/hit_model.hpp"

#include <cmath>
#include <string>

#include "hit/ad/ops.hpp"
#include "hit/error.hpp"

namespace hit::model {

using ad::Shape;

template <class T>
std::size_t ContributionLedger<T>::entry_count() const {
  std::size_t n = 0;
  for (auto s : sides) n += s * s;
  return n;
}

template <class T>
Tensor<T> ContributionLedger<T>::total() const {
  const std::size_t d = initial_cls.numel();
  Tensor<T> acc(Shape{d});
  auto a = acc.data();
  for (const auto& layer : entries) {
    auto e = layer.data();
    const std::size_t rows = layer.numel() / d;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < d; ++j) a[j] += e[r * d + j];
  }
  return acc;
}

namespace {

template <class T>
struct BatchState {
  Tensor<T> cls;   // [B x d]
  Tensor<T> grid;  // [B*M x d]
  std::size_t batch = 0;
  std::size_t side = 0;
};

template <class T>
BatchState<T> embed(std::span<const Image> images, const HitParams<T>& p, const HitConfig& c) {
  Tensor<T> patches = extract_patches<T>(images, c);
  Tensor<T> grid = ad::linear(patches, p.patch_w, p.patch_b);
  grid = ad::add_tiled(grid, p.pos);
  return {ad::broadcast_rows(p.cls, images.size()), grid, images.size(), static_cast<std::size_t>(c.grid_side())};
}

template <class T>
BatchState<T> pool(const BatchState<T>& s) {
  const std::size_t d = s.grid.dim(1);
  if (s.side % 2 != 0) throw ConfigError("cannot pool a grid of odd side " + std::to_string(s.side));
  Tensor<T> g = ad::reshape(s.grid, Shape{s.batch, s.side, s.side, d});
  g = ad::avg_pool2(g);
  const std::size_t half = s.side / 2;
  return {s.cls, ad::reshape(g, Shape{s.batch * half * half, d}), s.batch, half};
}

template <class T>
BatchState<T> run_block(const BatchState<T>& s, const BlockParams<T>& b, const HitConfig& c, bool drop,
                        const ForwardOptions& o, LayerCapture<T>* capture) {
  const T eps = static_cast<T>(c.ln_eps);
  const auto heads = static_cast<std::size_t>(b.attn.heads);
  Tensor<T> ln_cls = ad::layer_norm(s.cls, b.norm1_gamma, b.norm1_beta, eps);
  Tensor<T> ln_grid = ad::layer_norm(s.grid, b.norm1_gamma, b.norm1_beta, eps);
  Tensor<T> q = ad::linear(ln_cls, b.attn.wq, b.attn.bq);
  Tensor<T> k = ad::linear(ln_grid, b.attn.wk, b.attn.bk);
  Tensor<T> v = ad::linear(ln_grid, b.attn.wv, b.attn.bv);
  Tensor<T> probs = ad::softmax(ad::cls_attention_scores(q, k, heads), -1);
  if (o.training && c.attn_dropout > 0.0) {
    if (o.rng == nullptr) throw ContractError("training forward requires an RNG for attention dropout");
    probs = ad::dropout(probs, c.attn_dropout, true, *o.rng);
  }

  BatchState<T> next = s;
  if (!drop) {
    Tensor<T> mixed = ad::cls_attention_mix(probs, v, heads);
    next.cls = ad::add(s.cls, ad::linear(mixed, b.attn.wo, b.attn.bo));
  }
  if (b.has_mlp) {
    Tensor<T> h = ad::layer_norm(s.grid, b.norm2_gamma, b.norm2_beta, eps);
    h = ad::gelu(ad::linear(h, b.fc1_w, b.fc1_b));
    next.grid = ad::add(s.grid, ad::linear(h, b.fc2_w, b.fc2_b));
  }
  if (capture != nullptr) *capture = LayerCapture<T>{s.side, s.grid, s.cls, probs, v, drop};
  return next;
}

template <class T>
Tensor<T> classify(const Tensor<T>& cls, const HitParams<T>& p, const HitConfig& c) {
  Tensor<T> z = c.final_ln_mode == FinalLnMode::kFold
                    ? ad::layer_norm(cls, p.head_norm_gamma, p.head_norm_beta, static_cast<T>(c.ln_eps))
                    : cls;
  return ad::linear(z, p.head_w, p.head_b);
}

bool is_pool_layer(const HitConfig& c, int layer) {
  for (int p : c.pool_layers)
    if (p == layer) return true;
  return false;
}

template <class T>
void copy_values(const Tensor<T>& src, Tensor<T>& dst) {
  auto s = src.data();
  auto d = dst.data();
  std::copy(s.begin(), s.end(), d.begin());
}

// Per-token MHA contributions of sample b: rows sum to the MHA output minus b_o.
template <class T>
Tensor<T> unroll_attention(const LayerCapture<T>& cap, const AttentionParams<T>& attn, std::size_t b) {
  const std::size_t m = cap.side * cap.side;
  const std::size_t d = cap.values.dim(1);
  const auto heads = static_cast<std::size_t>(attn.heads);
  const std::size_t dk = d / heads;
  Tensor<T> scaled(Shape{m, d});
  auto u = scaled.data();
  auto v = cap.values.data();
  auto w = cap.weights.data();
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t h = 0; h < heads; ++h) {
      const T s = w[(b * heads + h) * m + t];
      for (std::size_t j = h * dk; j < (h + 1) * dk; ++j) u[t * d + j] = s * v[(b * m + t) * d + j];
    }
  // view() detaches the weight so nothing is recorded even under a tape.
  return ad::matmul(scaled, attn.wo.view(attn.wo.shape()));
}

}  // namespace

template <class T>
Tensor<T> extract_patches(std::span<const Image> images, const HitConfig& c) {
  if (images.empty()) throw ConfigError("forward pass needs at least one image");
  const auto p = static_cast<std::size_t>(c.patch_size);
  const auto n = static_cast<std::size_t>(c.grid_side());
  const std::size_t cols = 3 * p * p;
  Tensor<T> out(Shape{images.size() * n * n, cols});
  auto o = out.data();
  for (std::size_t b = 0; b < images.size(); ++b) {
    const Image& img = images[b];
    if (img.height != c.image_size || img.width != c.image_size)
      throw ConfigError("image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                        " does not match configured image_size " + std::to_string(c.image_size));
    for (std::size_t gy = 0; gy < n; ++gy)
      for (std::size_t gx = 0; gx < n; ++gx) {
        T* row = o.data() + ((b * n + gy) * n + gx) * cols;
        for (std::size_t py = 0; py < p; ++py)
          for (std::size_t px = 0; px < p; ++px)
            for (int ch = 0; ch < 3; ++ch)
              row[(py * p + px) * 3 + static_cast<std::size_t>(ch)] =
                  static_cast<T>(img.at(static_cast<int>(gy * p + py), static_cast<int>(gx * p + px), ch));
      }
  }
  return out;
}

template <class T>
HitModel<T>::HitModel(HitConfig config) : config_(std::move(config)), params_(make_params<T>(config_)) {}

template <class T>
HitModel<T>::HitModel(HitConfig config, HitParams<T> params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
}

template <class T>
HitModel<T> HitModel<T>::initialized(HitConfig config, std::uint64_t seed) {
  HitModel m(std::move(config));
  std::mt19937_64 rng(seed);
  init_params(m.params_, rng);
  return m;
}

template <class T>
ForwardResult<T> HitModel<T>::forward(std::span<const Image> images, const ForwardOptions& o) const {
  const auto& c = config_;
  if (!o.drop_layers.empty() && o.drop_layers.size() != static_cast<std::size_t>(c.depth))
    throw ConfigError("drop_layers has " + std::to_string(o.drop_layers.size()) + " entries for depth " +
                      std::to_string(c.depth));
  ForwardResult<T> result;
  if (o.capture) result.layers.resize(static_cast<std::size_t>(c.depth));
  BatchState<T> s = embed(images, params_, c);
  for (int l = 0; l < c.depth; ++l) {
    const auto li = static_cast<std::size_t>(l);
    if (is_pool_layer(c, l)) s = pool(s);
    if (l == o.grad_layer) {
      s.grid = s.grid.share_values();
      s.grid.set_requires_grad(true);
    }
    const bool drop = !o.drop_layers.empty() && o.drop_layers[li];
    s = run_block(s, params_.blocks[li], c, drop, o, o.capture ? &result.layers[li] : nullptr);
  }
  result.final_cls = s.cls;
  result.logits = classify(s.cls, params_, c);
  return result;
}

template <class T>
HitModel<T> HitModel<T>::replica() const {
  HitModel out = *this;
  for_each_tensor(out.params_, [](Tensor<T>& t) { t = t.share_values(); });
  return out;
}

template <class T>
HitModel<T> HitModel<T>::clone() const {
  HitModel out = *this;
  for_each_tensor(out.params_, [](Tensor<T>& t) {
    const bool rg = t.requires_grad();
    t = t.clone();
    t.set_requires_grad(rg);
  });
  return out;
}

template <class T>
template <class U>
HitModel<U> HitModel<T>::cast() const {
  HitModel<U> out(config_);
  std::vector<const Tensor<T>*> src;
  HitParams<T> copy = params_;
  for_each_tensor(copy, [&](Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  for_each_tensor(out.params(), [&](Tensor<U>& t) {
    auto s = src[i++]->data();
    auto d = t.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<U>(s[k]);
  });
  return out;
}

template <class T>
TokenState<T> patch_embed(const Image& image, const HitModel<T>& model) {
  const auto& c = model.config();
  BatchState<T> s = embed(std::span<const Image>(&image, 1), model.params(), c);
  const auto d = static_cast<std::size_t>(c.d_model);
  return {0, s.side, s.cls.view(Shape{d}), s.grid.view(Shape{s.side, s.side, d})};
}

template <class T>
SingleQueryAttention<T> single_query_attention(const Tensor<T>& query, const Tensor<T>& kv,
                                               const AttentionParams<T>& p, int head) {
  const std::size_t d = query.numel();
  if (kv.rank() != 2 || kv.dim(1) != d)
    throw DimensionError("single_query_attention: keys " + ad::shape_str(kv.shape()) + " vs query width " +
                         std::to_string(d));
  const auto heads = static_cast<std::size_t>(p.heads);
  if (head < 0 || static_cast<std::size_t>(head) >= heads) throw IndexError("head index out of range");
  const std::size_t m = kv.dim(0), dk = d / heads, c0 = static_cast<std::size_t>(head) * dk;
  auto x = kv.data();
  auto qv = query.data();
  auto project = [&](const T* row, const Tensor<T>& w, const Tensor<T>& b, std::vector<T>& out) {
    auto wd = w.data();
    auto bd = b.data();
    for (std::size_t j = 0; j < dk; ++j) {
      T acc = bd[c0 + j];
      for (std::size_t i = 0; i < d; ++i) acc += row[i] * wd[i * d + c0 + j];
      out[j] = acc;
    }
  };
  std::vector<T> q(dk), key(dk);
  project(qv.data(), p.wq, p.bq, q);
  std::vector<T> scores(m);
  Tensor<T> per_token(Shape{m, dk});
  auto pt = per_token.data();
  std::vector<T> value(dk);
  for (std::size_t t = 0; t < m; ++t) {
    project(x.data() + t * d, p.wk, p.bk, key);
    T s = T(0);
    for (std::size_t j = 0; j < dk; ++j) s += q[j] * key[j];
    scores[t] = s / std::sqrt(static_cast<T>(dk));
  }
  Tensor<T> weights = ad::softmax(Tensor<T>(Shape{m}, scores));
  auto w = weights.data();
  Tensor<T> output(Shape{dk});
  auto out = output.data();
  for (std::size_t t = 0; t < m; ++t) {
    project(x.data() + t * d, p.wv, p.bv, value);
    for (std::size_t j = 0; j < dk; ++j) {
      pt[t * dk + j] = w[t] * value[j];
      out[j] += pt[t * dk + j];
    }
  }
  return {output, weights, per_token};
}

template <class T>
MhaDecomposition<T> mha_cls(const Tensor<T>& query, const Tensor<T>& kv, const AttentionParams<T>& p) {
  const std::size_t d = query.numel();
  const std::size_t m = kv.dim(0);
  const auto heads = static_cast<std::size_t>(p.heads);
  const std::size_t dk = d / heads;
  Tensor<T> per_token(Shape{m, d});
  auto pt = per_token.data();
  auto wo = p.wo.data();
  for (std::size_t h = 0; h < heads; ++h) {
    auto head = single_query_attention(query, kv, p, static_cast<int>(h));
    auto terms = head.per_token.data();
    // (s(v) (v W_v^h + b_v^h)) W_o^h, with W_o^h the h-th block of dk rows.
    for (std::size_t t = 0; t < m; ++t)
      for (std::size_t r = 0; r < dk; ++r) {
        const T coef = terms[t * dk + r];
        const T* wrow = wo.data() + (h * dk + r) * d;
        for (std::size_t j = 0; j < d; ++j) pt[t * d + j] += coef * wrow[j];
      }
  }
  Tensor<T> output = p.bo.clone();
  auto out = output.data();
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t j = 0; j < d; ++j) out[j] += pt[t * d + j];
  return {output, per_token, p.bo.clone()};
}

template <class T>
BlockOutput<T> hit_block(const TokenState<T>& state, const BlockParams<T>& block, const HitConfig& c) {
  const std::size_t d = state.cls.numel();
  const std::size_t m = state.side * state.side;
  BatchState<T> s{state.cls.view(Shape{1, d}), state.grid.view(Shape{m, d}), 1, state.side};
  BatchState<T> next = run_block<T>(s, block, c, false, ForwardOptions{}, nullptr);

  const T eps = static_cast<T>(c.ln_eps);
  Tensor<T> ln_cls = ad::layer_norm(state.cls.view(Shape{d}), block.norm1_gamma, block.norm1_beta, eps);
  Tensor<T> ln_grid = ad::layer_norm(state.grid.view(Shape{m, d}), block.norm1_gamma, block.norm1_beta, eps);
  auto unrolled = mha_cls(ln_cls, ln_grid, block.attn);

  BlockOutput<T> out;
  out.state = TokenState<T>{state.layer + 1, state.side, next.cls.view(Shape{d}),
                            next.grid.view(Shape{state.side, state.side, d})};
  out.per_token = unrolled.per_token;
  return out;
}

template <class T>
TokenState<T> pool_tokens(const TokenState<T>& state) {
  if (state.side % 2 != 0) throw ConfigError("cannot pool a grid of odd side " + std::to_string(state.side));
  TokenState<T> out = state;
  out.grid = ad::avg_pool2(state.grid);
  out.side = state.side / 2;
  return out;
}

template <class T>
std::vector<LedgerForward<T>> forward_with_ledger(const HitModel<T>& model, std::span<const Image> images,
                                                  const ForwardOptions& options) {
  ForwardOptions o = options;
  o.capture = true;
  const auto& c = model.config();
  const auto& p = model.params();
  ForwardResult<T> fr = model.forward(images, o);

  const auto depth = static_cast<std::size_t>(c.depth);
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto classes = static_cast<std::size_t>(c.num_classes);
  const auto heads = static_cast<std::size_t>(c.heads);
  auto x0 = p.cls.data();

  std::vector<LedgerForward<T>> out(images.size());
  for (std::size_t b = 0; b < images.size(); ++b) {
    LedgerForward<T>& r = out[b];
    r.logits = Tensor<T>(Shape{classes});
    std::copy_n(fr.logits.data().begin() + static_cast<std::ptrdiff_t>(b * classes), classes, r.logits.data().begin());
    r.final_cls = Tensor<T>(Shape{d});
    std::copy_n(fr.final_cls.data().begin() + static_cast<std::ptrdiff_t>(b * d), d, r.final_cls.data().begin());

    auto& ledger = r.ledger;
    ledger.initial_cls = p.cls.clone();
    ledger.input_side = static_cast<std::size_t>(c.grid_side());
    r.trace.heads = heads;
    r.trace.input_side = ledger.input_side;
    for (std::size_t l = 0; l < depth; ++l) {
      const LayerCapture<T>& cap = fr.layers[l];
      const std::size_t m = cap.side * cap.side;
      const T layer_share = T(1) / static_cast<T>(depth * m);
      Tensor<T> entries = cap.dropped ? Tensor<T>(Shape{m, d}) : unroll_attention(cap, p.blocks[l].attn, b);
      Tensor<T> bias = cap.dropped ? Tensor<T>(Shape{d}) : p.blocks[l].attn.bo.clone();
      auto e = entries.data();
      auto bo = bias.data();
      const T inv_m = T(1) / static_cast<T>(m);
      for (std::size_t t = 0; t < m; ++t)
        for (std::size_t j = 0; j < d; ++j) e[t * d + j] += bo[j] * inv_m + x0[j] * layer_share;
      ledger.sides.push_back(cap.side);
      ledger.entries.push_back(entries);
      ledger.output_bias.push_back(bias);

      r.trace.sides.push_back(cap.side);
      std::vector<double> w(heads * m);
      auto cw = cap.weights.data();
      for (std::size_t i = 0; i < heads * m; ++i) w[i] = static_cast<double>(cw[b * heads * m + i]);
      r.trace.weights.push_back(std::move(w));
    }
  }
  return out;
}

template <class T>
LedgerForward<T> forward_with_ledger(const HitModel<T>& model, const Image& image, const ForwardOptions& options) {
  return std::move(forward_with_ledger(model, std::span<const Image>(&image, 1), options).front());
}

template class HitModel<float>;
template class HitModel<double>;
template struct ContributionLedger<float>;
template struct ContributionLedger<double>;
template HitModel<double> HitModel<float>::cast<double>() const;
template HitModel<float> HitModel<double>::cast<float>() const;
template HitModel<float> HitModel<float>::cast<float>() const;
template HitModel<double> HitModel<double>::cast<double>() const;

#define HIT_INSTANTIATE_MODEL_FNS(T)                                                                            \
  template Tensor<T> extract_patches<T>(std::span<const Image>, const HitConfig&);                              \
  template TokenState<T> patch_embed<T>(const Image&, const HitModel<T>&);                                      \
  template SingleQueryAttention<T> single_query_attention<T>(const Tensor<T>&, const Tensor<T>&,                \
                                                             const AttentionParams<T>&, int);                   \
  template MhaDecomposition<T> mha_cls<T>(const Tensor<T>&, const Tensor<T>&, const AttentionParams<T>&);       \
  template BlockOutput<T> hit_block<T>(const TokenState<T>&, const BlockParams<T>&, const HitConfig&);          \
  template TokenState<T> pool_tokens<T>(const TokenState<T>&);                                                  \
  template std::vector<LedgerForward<T>> forward_with_ledger<T>(const HitModel<T>&, std::span<const Image>,     \
                                                                const ForwardOptions&);                         \
  template LedgerForward<T> forward_with_ledger<T>(const HitModel<T>&, const Image&, const ForwardOptions&);

HIT_INSTANTIATE_MODEL_FNS(float)
HIT_INSTANTIATE_MODEL_FNS(double)

#undef HIT_INSTANTIATE_MODEL_FNS

}  // namespace hit::model
