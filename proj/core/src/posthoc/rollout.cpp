#include "hit/error.hpp"
#include "hit/posthoc/posthoc.hpp"

namespace hit::posthoc {

SaliencyMap rollout_hit(const model::AttentionTrace& trace) {
  if (trace.weights.empty()) throw ContractError("rollout needs a trace with at least one layer");
  if (trace.sides.size() != trace.weights.size()) throw DimensionError("trace sides and weights disagree");
  SaliencyMap out;
  out.side = trace.input_side;
  out.values.assign(out.side * out.side, 0.0);
  const double inv_layers = 1.0 / static_cast<double>(trace.weights.size());
  for (std::size_t l = 0; l < trace.weights.size(); ++l) {
    const std::size_t side = trace.sides[l];
    const std::size_t m = side * side;
    const auto& w = trace.weights[l];
    if (w.size() != trace.heads * m) throw DimensionError("trace layer " + std::to_string(l) + " has wrong size");
    std::vector<double> mean(m, 0.0);
    for (std::size_t h = 0; h < trace.heads; ++h)
      for (std::size_t t = 0; t < m; ++t) mean[t] += w[h * m + t] / static_cast<double>(trace.heads);
    auto up = attribution::upsample_through_pools(mean, side, attribution::pools_between(trace.input_side, side));
    for (std::size_t i = 0; i < up.size(); ++i) out.values[i] += up[i] * inv_layers;
  }
  return out;
}

template <class T>
SaliencyMap rollout_hit(const model::HitModel<T>& model, const Image& image) {
  return rollout_hit(model::forward_with_ledger(model, image).trace);
}

template SaliencyMap rollout_hit<float>(const model::HitModel<float>&, const Image&);
template SaliencyMap rollout_hit<double>(const model::HitModel<double>&, const Image&);

}  // namespace hit::posthoc
