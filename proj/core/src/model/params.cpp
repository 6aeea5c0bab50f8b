#include "hit/model/params.hpp"

#include <cmath>

namespace hit::model {

namespace {

constexpr double kInitStd = 0.02;

template <class T>
Tensor<T> zeros(std::size_t a) { return Tensor<T>(ad::Shape{a}); }
template <class T>
Tensor<T> zeros(std::size_t a, std::size_t b) { return Tensor<T>(ad::Shape{a, b}); }
template <class T>
Tensor<T> ones(std::size_t a) { return Tensor<T>(ad::Shape{a}, T(1)); }

template <class T>
void fill_trunc(std::span<T> values, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : values) {
    double z = normal(rng);
    while (std::abs(z) > 2.0) z = normal(rng);
    v = static_cast<T>(z * stddev);
  }
}

template <class T>
void reset(Tensor<T>& t, T value) {
  for (auto& v : t.data()) v = value;
}

}  // namespace

void fill_trunc_normal(std::span<float> values, double stddev, std::mt19937_64& rng) {
  fill_trunc(values, stddev, rng);
}
void fill_trunc_normal(std::span<double> values, double stddev, std::mt19937_64& rng) {
  fill_trunc(values, stddev, rng);
}

template <class T>
HitParams<T> make_params(const HitConfig& c) {
  c.validate();
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto hidden = static_cast<std::size_t>(c.mlp_hidden());
  const auto n = static_cast<std::size_t>(c.grid_side());
  const auto classes = static_cast<std::size_t>(c.num_classes);

  HitParams<T> p;
  p.patch_w = zeros<T>(static_cast<std::size_t>(c.patch_dim()), d);
  p.patch_b = zeros<T>(d);
  p.pos = zeros<T>(n * n, d);
  p.cls = zeros<T>(d);
  for (int l = 0; l < c.depth; ++l) {
    BlockParams<T> b;
    b.norm1_gamma = ones<T>(d);
    b.norm1_beta = zeros<T>(d);
    b.attn.heads = c.heads;
    b.attn.wq = zeros<T>(d, d);
    b.attn.bq = zeros<T>(d);
    b.attn.wk = zeros<T>(d, d);
    b.attn.bk = zeros<T>(d);
    b.attn.wv = zeros<T>(d, d);
    b.attn.bv = zeros<T>(d);
    b.attn.wo = zeros<T>(d, d);
    b.attn.bo = zeros<T>(d);
    b.has_mlp = c.has_mlp(l);
    if (b.has_mlp) {
      b.norm2_gamma = ones<T>(d);
      b.norm2_beta = zeros<T>(d);
      b.fc1_w = zeros<T>(d, hidden);
      b.fc1_b = zeros<T>(hidden);
      b.fc2_w = zeros<T>(hidden, d);
      b.fc2_b = zeros<T>(d);
    }
    p.blocks.push_back(std::move(b));
  }
  if (c.final_ln_mode == FinalLnMode::kFold) {
    p.head_norm_gamma = ones<T>(d);
    p.head_norm_beta = zeros<T>(d);
  }
  p.head_w = zeros<T>(d, classes);
  p.head_b = zeros<T>(classes);
  return p;
}

template <class T>
void init_block(BlockParams<T>& b, std::mt19937_64& rng) {
  reset(b.norm1_gamma, T(1));
  reset(b.norm1_beta, T(0));
  for (Tensor<T>* w : {&b.attn.wq, &b.attn.wk, &b.attn.wv, &b.attn.wo}) fill_trunc(w->data(), kInitStd, rng);
  for (Tensor<T>* bias : {&b.attn.bq, &b.attn.bk, &b.attn.bv, &b.attn.bo}) reset(*bias, T(0));
  if (b.has_mlp) {
    reset(b.norm2_gamma, T(1));
    reset(b.norm2_beta, T(0));
    fill_trunc(b.fc1_w.data(), kInitStd, rng);
    fill_trunc(b.fc2_w.data(), kInitStd, rng);
    reset(b.fc1_b, T(0));
    reset(b.fc2_b, T(0));
  }
}

template <class T>
void init_head(HitParams<T>& p, std::mt19937_64& rng) {
  if (p.head_norm_gamma.defined()) {
    reset(p.head_norm_gamma, T(1));
    reset(p.head_norm_beta, T(0));
  }
  fill_trunc(p.head_w.data(), kInitStd, rng);
  reset(p.head_b, T(0));
}

template <class T>
void init_params(HitParams<T>& p, std::mt19937_64& rng) {
  fill_trunc(p.patch_w.data(), kInitStd, rng);
  reset(p.patch_b, T(0));
  fill_trunc(p.pos.data(), kInitStd, rng);
  fill_trunc(p.cls.data(), kInitStd, rng);
  for (auto& b : p.blocks) init_block(b, rng);
  init_head(p, rng);
}

template <class T>
NamedTensors<T> named_parameters(const HitParams<T>& p) {
  NamedTensors<T> out;
  out.emplace_back("cls_token", p.cls);
  out.emplace_back("pos_embed", p.pos);
  out.emplace_back("patch_embed.weight", p.patch_w);
  out.emplace_back("patch_embed.bias", p.patch_b);
  for (std::size_t l = 0; l < p.blocks.size(); ++l) {
    const auto& b = p.blocks[l];
    const std::string pre = "blocks." + std::to_string(l) + ".";
    out.emplace_back(pre + "norm1.weight", b.norm1_gamma);
    out.emplace_back(pre + "norm1.bias", b.norm1_beta);
    out.emplace_back(pre + "attn.wq", b.attn.wq);
    out.emplace_back(pre + "attn.bq", b.attn.bq);
    out.emplace_back(pre + "attn.wk", b.attn.wk);
    out.emplace_back(pre + "attn.bk", b.attn.bk);
    out.emplace_back(pre + "attn.wv", b.attn.wv);
    out.emplace_back(pre + "attn.bv", b.attn.bv);
    out.emplace_back(pre + "attn.wo", b.attn.wo);
    out.emplace_back(pre + "attn.bo", b.attn.bo);
    if (b.has_mlp) {
      out.emplace_back(pre + "norm2.weight", b.norm2_gamma);
      out.emplace_back(pre + "norm2.bias", b.norm2_beta);
      out.emplace_back(pre + "mlp.fc1.weight", b.fc1_w);
      out.emplace_back(pre + "mlp.fc1.bias", b.fc1_b);
      out.emplace_back(pre + "mlp.fc2.weight", b.fc2_w);
      out.emplace_back(pre + "mlp.fc2.bias", b.fc2_b);
    }
  }
  if (p.head_norm_gamma.defined()) {
    out.emplace_back("head_norm.weight", p.head_norm_gamma);
    out.emplace_back("head_norm.bias", p.head_norm_beta);
  }
  out.emplace_back("head.weight", p.head_w);
  out.emplace_back("head.bias", p.head_b);
  return out;
}

bool decays(const std::string& name) {
  auto ends_with = [&](const std::string& suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".weight") ? name.find("norm") == std::string::npos
                              : (ends_with(".wq") || ends_with(".wk") || ends_with(".wv") || ends_with(".wo"));
}

template HitParams<float> make_params<float>(const HitConfig&);
template HitParams<double> make_params<double>(const HitConfig&);
template void init_params<float>(HitParams<float>&, std::mt19937_64&);
template void init_params<double>(HitParams<double>&, std::mt19937_64&);
template void init_block<float>(BlockParams<float>&, std::mt19937_64&);
template void init_block<double>(BlockParams<double>&, std::mt19937_64&);
template void init_head<float>(HitParams<float>&, std::mt19937_64&);
template void init_head<double>(HitParams<double>&, std::mt19937_64&);
template NamedTensors<float> named_parameters<float>(const HitParams<float>&);
template NamedTensors<double> named_parameters<double>(const HitParams<double>&);

}  // namespace hit::model
