#include "hit/attribution/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hit/error.hpp"
#include "hit/io/image.hpp"
#include "hit/io/text_output.hpp"
#include "hit/parse.hpp"

namespace hit::attribution {

double SaliencyMap::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

std::vector<double> upsample_through_pools(std::span<const double> map, std::size_t side, int pools) {
  if (map.size() != side * side)
    throw DimensionError("map of " + std::to_string(map.size()) + " cells is not a " + std::to_string(side) +
                         "x" + std::to_string(side) + " grid");
  if (pools < 0) throw RangeError("negative pool count");
  std::vector<double> cur(map.begin(), map.end());
  for (int p = 0; p < pools; ++p) {
    const std::size_t big = side * 2;
    std::vector<double> next(big * big);
    for (std::size_t r = 0; r < big; ++r)
      for (std::size_t c = 0; c < big; ++c) next[r * big + c] = cur[(r / 2) * side + c / 2] / 4.0;
    cur = std::move(next);
    side = big;
  }
  return cur;
}

int pools_between(std::size_t input_side, std::size_t side) {
  int pools = 0;
  std::size_t s = side;
  while (s < input_side) {
    s *= 2;
    ++pools;
  }
  if (s != input_side || side == 0)
    throw DimensionError("grid side " + std::to_string(side) + " does not divide into input side " +
                         std::to_string(input_side) + " by powers of two");
  return pools;
}

namespace {

template <class T>
void check_class(const model::FoldedLogits<T>& folded, int class_index) {
  const auto classes = folded.logits.numel();
  if (class_index < 0 || static_cast<std::size_t>(class_index) >= classes)
    throw IndexError("class " + std::to_string(class_index) + " out of range [0, " + std::to_string(classes) + ")");
}

template <class T>
std::vector<double> layer_column(const model::FoldedLogits<T>& folded, std::size_t layer, int class_index) {
  const auto classes = folded.logits.numel();
  auto f = folded.per_entry[layer].data();
  std::vector<double> col(f.size() / classes);
  for (std::size_t n = 0; n < col.size(); ++n)
    col[n] = static_cast<double>(f[n * classes + static_cast<std::size_t>(class_index)]);
  return col;
}

}  // namespace

template <class T>
SaliencyMap saliency_from_ledger(const model::ContributionLedger<T>& ledger, const model::FoldedLogits<T>& folded,
                                 int class_index) {
  check_class(folded, class_index);
  if (folded.per_entry.size() != ledger.depth()) throw DimensionError("fold does not match ledger depth");
  SaliencyMap out;
  out.class_index = class_index;
  out.side = ledger.input_side;
  out.values.assign(out.side * out.side, 0.0);
  for (std::size_t l = 0; l < ledger.depth(); ++l) {
    const std::size_t side = ledger.sides[l];
    auto up = upsample_through_pools(layer_column(folded, l, class_index), side,
                                     pools_between(ledger.input_side, side));
    for (std::size_t i = 0; i < up.size(); ++i) out.values[i] += up[i];
  }
  return out;
}

template <class T>
LayerProfile layerwise_contribution(const model::ContributionLedger<T>& ledger,
                                    const model::FoldedLogits<T>& folded, int class_index) {
  check_class(folded, class_index);
  LayerProfile out;
  out.class_index = class_index;
  for (std::size_t l = 0; l < ledger.depth(); ++l) {
    auto col = layer_column(folded, l, class_index);
    const double s = std::accumulate(col.begin(), col.end(), 0.0);
    out.signed_contribution.push_back(s);
    out.absolute_contribution.push_back(std::abs(s));
  }
  return out;
}

template <class T>
Explanation<T> explain(const model::HitModel<T>& m, const Image& image, int class_index) {
  Explanation<T> e;
  e.forward = model::forward_with_ledger(m, image);
  e.folded = model::fold_final_layernorm(e.forward.ledger, m.params(), m.config());
  e.map = saliency_from_ledger(e.forward.ledger, e.folded, class_index);
  e.logit = static_cast<double>(e.forward.logits.data()[static_cast<std::size_t>(class_index)]);
  return e;
}

template <class T>
Explanation<T> explain_predicted(const model::HitModel<T>& m, const Image& image) {
  Explanation<T> e;
  e.forward = model::forward_with_ledger(m, image);
  e.folded = model::fold_final_layernorm(e.forward.ledger, m.params(), m.config());
  auto logits = e.forward.logits.data();
  const auto cls = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  e.map = saliency_from_ledger(e.forward.ledger, e.folded, cls);
  e.logit = static_cast<double>(logits[static_cast<std::size_t>(cls)]);
  return e;
}

SaliencyMap upscale_nearest(const SaliencyMap& map, std::size_t factor) {
  if (factor == 0) throw RangeError("upscale factor must be positive");
  SaliencyMap out;
  out.class_index = map.class_index;
  out.side = map.side * factor;
  out.values.resize(out.side * out.side);
  for (std::size_t r = 0; r < out.side; ++r)
    for (std::size_t c = 0; c < out.side; ++c) out.values[r * out.side + c] = map.at(r / factor, c / factor);
  return out;
}

std::string saliency_csv(const SaliencyMap& map, const std::string& method) {
  std::ostringstream os;
  if (!method.empty()) os << "# method=" << method << '\n';
  os << "row,col,value\n";
  for (std::size_t r = 0; r < map.side; ++r)
    for (std::size_t c = 0; c < map.side; ++c) os << r << ',' << c << ',' << format_double(map.at(r, c)) << '\n';
  return os.str();
}

std::vector<std::uint8_t> render_gray(const SaliencyMap& map) {
  std::vector<std::uint8_t> gray(map.values.size(), 0);
  if (map.values.empty()) return gray;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return gray;
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = static_cast<std::uint8_t>(std::lround((map.values[i] - *lo) / range * 255.0));
  return gray;
}

void write_saliency_pgm(const std::filesystem::path& path, const SaliencyMap& map) {
  const int side = static_cast<int>(map.side);
  write_pgm(path, side, side, render_gray(map));
}

template SaliencyMap saliency_from_ledger<float>(const model::ContributionLedger<float>&,
                                                 const model::FoldedLogits<float>&, int);
template SaliencyMap saliency_from_ledger<double>(const model::ContributionLedger<double>&,
                                                  const model::FoldedLogits<double>&, int);
template LayerProfile layerwise_contribution<float>(const model::ContributionLedger<float>&,
                                                    const model::FoldedLogits<float>&, int);
template LayerProfile layerwise_contribution<double>(const model::ContributionLedger<double>&,
                                                     const model::FoldedLogits<double>&, int);
template Explanation<float> explain<float>(const model::HitModel<float>&, const Image&, int);
template Explanation<double> explain<double>(const model::HitModel<double>&, const Image&, int);
template Explanation<float> explain_predicted<float>(const model::HitModel<float>&, const Image&);
template Explanation<double> explain_predicted<double>(const model::HitModel<double>&, const Image&);

}  // namespace hit::attribution
