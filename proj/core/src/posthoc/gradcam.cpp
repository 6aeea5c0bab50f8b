#include <cmath>
#include <utility>

#include "hit/ad/ops.hpp"
#include "hit/ad/tape.hpp"
#include "hit/error.hpp"
#include "hit/posthoc/posthoc.hpp"

namespace hit::posthoc {

namespace {

int resolve_layer(const model::HitConfig& c, int layer) {
  const int resolved = layer < 0 ? c.depth - 1 : layer;
  if (resolved < 0 || resolved >= c.depth)
    throw IndexError("gradcam layer " + std::to_string(layer) + " out of range for depth " + std::to_string(c.depth));
  return resolved;
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> grid_and_gradient(const model::HitModel<T>& m, const Image& image, int class_index,
                                                   int layer) {
  const auto& c = m.config();
  if (class_index < 0 || class_index >= c.num_classes)
    throw IndexError("class " + std::to_string(class_index) + " out of range");
  layer = resolve_layer(c, layer);
  ad::Tape<T> tape;
  model::ForwardOptions o;
  o.capture = true;
  o.grad_layer = layer;
  // Frozen replica: only the detached grid leaf collects gradients, so
  // concurrent calls never write into shared parameter slots.
  model::HitModel<T> frozen = m.replica();
  model::for_each_tensor(frozen.params(), [](Tensor<T>& t) { t.set_requires_grad(false); });
  model::ForwardResult<T> r;
  {
    typename ad::Tape<T>::Recording rec(tape);
    r = frozen.forward(std::span<const Image>(&image, 1), o);
  }
  Tensor<T> grid = r.layers[static_cast<std::size_t>(layer)].grid;
  Tensor<T> onehot(ad::Shape{1, static_cast<std::size_t>(c.num_classes)});
  onehot.data()[static_cast<std::size_t>(class_index)] = T(1);
  Tensor<T> logit;
  {
    typename ad::Tape<T>::Recording rec(tape);
    logit = ad::dot(r.logits, onehot);
  }
  tape.backward(logit);
  Tensor<T> grad(grid.shape());
  auto g = std::as_const(grid).grad();
  if (!g.empty()) std::copy(g.begin(), g.end(), grad.data().begin());
  return {grid, grad};
}

}  // namespace

template <class T>
Tensor<T> gradcam_gradient(const model::HitModel<T>& m, const Image& image, int class_index, int layer) {
  return grid_and_gradient(m, image, class_index, layer).second;
}

template <class T>
SaliencyMap gradcam_hit(const model::HitModel<T>& m, const Image& image, int class_index, int layer) {
  auto [grid, grad] = grid_and_gradient(m, image, class_index, layer);
  const std::size_t tokens = grid.dim(0), d = grid.dim(1);
  auto g = grad.data();
  auto x = grid.data();
  std::vector<double> alpha(d, 0.0);
  for (std::size_t t = 0; t < tokens; ++t)
    for (std::size_t j = 0; j < d; ++j) alpha[j] += static_cast<double>(g[t * d + j]);
  for (auto& a : alpha) a /= static_cast<double>(tokens);
  std::vector<double> cells(tokens);
  for (std::size_t t = 0; t < tokens; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += alpha[j] * static_cast<double>(x[t * d + j]);
    cells[t] = s > 0.0 ? s : 0.0;
  }
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(tokens))));
  const auto input_side = static_cast<std::size_t>(m.config().grid_side());
  SaliencyMap out;
  out.class_index = class_index;
  out.side = input_side;
  out.values = attribution::upsample_through_pools(cells, side, attribution::pools_between(input_side, side));
  return out;
}

template Tensor<float> gradcam_gradient<float>(const model::HitModel<float>&, const Image&, int, int);
template Tensor<double> gradcam_gradient<double>(const model::HitModel<double>&, const Image&, int, int);
template SaliencyMap gradcam_hit<float>(const model::HitModel<float>&, const Image&, int, int);
template SaliencyMap gradcam_hit<double>(const model::HitModel<double>&, const Image&, int, int);

}  // namespace hit::posthoc
