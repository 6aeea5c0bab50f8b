#include "hit/model/fold.hpp"

#include <cmath>

#include "hit/error.hpp"

namespace hit::model {

template <class T>
FoldedLogits<T> fold_final_layernorm(const ContributionLedger<T>& ledger, const HitParams<T>& p,
                                     const HitConfig& c) {
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto classes = static_cast<std::size_t>(c.num_classes);
  if (ledger.initial_cls.numel() != d) throw DimensionError("ledger width does not match the model");
  const std::size_t k = ledger.entry_count();
  if (k == 0) throw ContractError("cannot fold an empty ledger");

  FoldedLogits<T> out;
  std::vector<T> scale(d, T(1));
  std::vector<T> shift(d, T(0));
  if (c.final_ln_mode == FinalLnMode::kFold) {
    Tensor<T> x = ledger.total();
    auto xv = x.data();
    T mu = T(0);
    for (T v : xv) mu += v;
    mu /= static_cast<T>(d);
    T var = T(0);
    for (T v : xv) var += (v - mu) * (v - mu);
    var /= static_cast<T>(d);
    const T sigma = std::sqrt(var + static_cast<T>(c.ln_eps));
    auto g = p.head_norm_gamma.data();
    auto b = p.head_norm_beta.data();
    for (std::size_t j = 0; j < d; ++j) {
      scale[j] = g[j] / sigma;
      shift[j] = b[j] - mu * g[j] / sigma;
    }
    out.mu = mu;
    out.sigma = sigma;
  }

  auto w = p.head_w.data();
  auto hb = p.head_b.data();
  // Constant share each entry receives: (shift W + b) / K.
  std::vector<T> share(classes);
  for (std::size_t cl = 0; cl < classes; ++cl) {
    T acc = hb[cl];
    for (std::size_t j = 0; j < d; ++j) acc += shift[j] * w[j * classes + cl];
    share[cl] = acc / static_cast<T>(k);
  }

  out.logits = Tensor<T>(ad::Shape{classes});
  auto total = out.logits.data();
  for (const auto& layer : ledger.entries) {
    const std::size_t m = layer.numel() / d;
    auto e = layer.data();
    Tensor<T> folded(ad::Shape{m, classes});
    auto f = folded.data();
    for (std::size_t t = 0; t < m; ++t)
      for (std::size_t cl = 0; cl < classes; ++cl) {
        T acc = share[cl];
        for (std::size_t j = 0; j < d; ++j) acc += e[t * d + j] * scale[j] * w[j * classes + cl];
        f[t * classes + cl] = acc;
        total[cl] += acc;
      }
    out.per_entry.push_back(std::move(folded));
  }
  return out;
}

template FoldedLogits<float> fold_final_layernorm<float>(const ContributionLedger<float>&, const HitParams<float>&,
                                                         const HitConfig&);
template FoldedLogits<double> fold_final_layernorm<double>(const ContributionLedger<double>&,
                                                           const HitParams<double>&, const HitConfig&);

}  // namespace hit::model
