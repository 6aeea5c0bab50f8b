#include "hit/eval/predictor.hpp"

#include <algorithm>
#include <cmath>

namespace hit::eval {

std::vector<double> softmax_row(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& v : p) total += v = std::exp(v - mx);
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::vector<double>> HitPredictor::predict_proba(std::span<const Image> images) const {
  const auto classes = static_cast<std::size_t>(model_.config().num_classes);
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (std::size_t lo = 0; lo < images.size(); lo += batch_) {
    const std::size_t n = std::min(batch_, images.size() - lo);
    const auto result = model_.forward(images.subspan(lo, n));
    auto logits = result.logits.data();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(classes);
      for (std::size_t c = 0; c < classes; ++c) row[c] = static_cast<double>(logits[i * classes + c]);
      out.push_back(softmax_row(row));
    }
  }
  return out;
}

}  // namespace hit::eval
