#include "hit/eval/curves.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hit/error.hpp"
#include "hit/parse.hpp"

namespace hit::eval {

std::string to_string(CurveMode mode) { return mode == CurveMode::kDeletion ? "deletion" : "insertion"; }

CurveMode parse_curve_mode(const std::string& text) {
  if (text == "insertion") return CurveMode::kInsertion;
  if (text == "deletion") return CurveMode::kDeletion;
  throw ConfigError("unknown curve mode '" + text + "' (expected insertion or deletion)");
}

std::vector<std::size_t> rank_cells(const SaliencyMap& map) {
  std::vector<std::size_t> order(map.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return map.values[a] > map.values[b]; });
  return order;
}

namespace {

void copy_patch(const Image& from, Image& to, std::size_t cell, std::size_t side, int p) {
  const int r = static_cast<int>(cell / side), c = static_cast<int>(cell % side);
  for (int y = r * p; y < (r + 1) * p; ++y)
    for (int x = c * p; x < (c + 1) * p; ++x)
      for (int ch = 0; ch < 3; ++ch) to.at(y, x, ch) = from.at(y, x, ch);
}

void check_alignment(const Image& image, const Image& corrupted, std::size_t cells, int patch_size) {
  if (corrupted.height != image.height || corrupted.width != image.width)
    throw DimensionError("corrupted image size differs from the original");
  if (patch_size <= 0 || image.height != image.width || image.height % patch_size != 0)
    throw DimensionError("image is not a square grid of patches");
  const auto side = static_cast<std::size_t>(image.height / patch_size);
  if (cells != side * side)
    throw DimensionError("map has " + std::to_string(cells) + " cells but the image has a " + std::to_string(side) +
                         "x" + std::to_string(side) + " patch grid");
}

}  // namespace

std::vector<Image> perturbation_sequence(const Image& image, const Image& corrupted,
                                         std::span<const std::size_t> order, int patch_size, CurveMode mode) {
  check_alignment(image, corrupted, order.size(), patch_size);
  const auto side = static_cast<std::size_t>(image.height / patch_size);
  const bool insert = mode == CurveMode::kInsertion;
  std::vector<Image> seq;
  seq.reserve(order.size() + 1);
  Image cur = insert ? corrupted : image;
  seq.push_back(cur);
  for (std::size_t cell : order) {
    copy_patch(insert ? image : corrupted, cur, cell, side, patch_size);
    seq.push_back(cur);
  }
  return seq;
}

Curve perturbation_curve(const Predictor& predictor, const Image& image, const Image& corrupted,
                         const SaliencyMap& map, CurveMode mode, int target_class) {
  const auto order = rank_cells(map);
  const auto seq = perturbation_sequence(image, corrupted, order, predictor.patch_size(), mode);
  const auto probs = predictor.predict_proba(seq);
  Curve curve;
  const std::size_t steps = order.size();
  for (std::size_t k = 0; k <= steps; ++k) {
    const auto& row = probs[k];
    if (target_class < 0 || static_cast<std::size_t>(target_class) >= row.size())
      throw IndexError("target class " + std::to_string(target_class) + " out of range");
    curve.fractions.push_back(static_cast<double>(k) / static_cast<double>(steps));
    curve.probs.push_back(row[static_cast<std::size_t>(target_class)]);
  }
  return curve;
}

namespace {

Curve clean_class_curve(const Predictor& predictor, const Image& image, const SaliencyMap& map,
                        Corruption corruption, const CurveOptions& options, CurveMode mode) {
  const Image corrupted = corrupt(image, corruption, options.blur_sigma, options.blur_kernel);
  const auto clean = predictor.predict_proba(std::span<const Image>(&image, 1)).front();
  const auto target = static_cast<int>(std::max_element(clean.begin(), clean.end()) - clean.begin());
  return perturbation_curve(predictor, image, corrupted, map, mode, target);
}

}  // namespace

Curve insertion_curve(const Predictor& predictor, const Image& image, const SaliencyMap& map, Corruption corruption,
                      const CurveOptions& options) {
  return clean_class_curve(predictor, image, map, corruption, options, CurveMode::kInsertion);
}

Curve deletion_curve(const Predictor& predictor, const Image& image, const SaliencyMap& map, Corruption corruption,
                     const CurveOptions& options) {
  return clean_class_curve(predictor, image, map, corruption, options, CurveMode::kDeletion);
}

double auc(const Curve& curve) {
  if (curve.fractions.size() < 2 || curve.fractions.size() != curve.probs.size())
    throw ContractError("a curve needs at least two (fraction, value) points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fractions.size(); ++i)
    area += (curve.fractions[i] - curve.fractions[i - 1]) * (curve.probs[i] + curve.probs[i - 1]) / 2.0;
  return area;
}

NormalizedAuc nauc(const Curve& curve) {
  if (curve.probs.size() < 2) throw ContractError("a curve needs at least two (fraction, value) points");
  const auto [lo, hi] = std::minmax_element(curve.probs.begin(), curve.probs.end());
  const double range = *hi - *lo;
  if (range < 1e-9) return {0.5, true};
  Curve scaled = curve;
  for (auto& v : scaled.probs) v = (v - *lo) / range;
  return {auc(scaled), false};
}

CurveRecord evaluate_curves(const Predictor& predictor, std::span<const Image> images,
                            std::span<const SaliencyMap> maps, CurveMode mode, Corruption corruption,
                            const std::string& method, const CurveOptions& options, std::size_t workers) {
  if (images.size() != maps.size())
    throw DimensionError(std::to_string(images.size()) + " images but " + std::to_string(maps.size()) + " maps");
  if (images.empty()) throw ContractError("no images to evaluate");
  CurveRecord rec;
  rec.mode = mode;
  rec.corruption = corruption;
  rec.method = method;
  rec.per_image.resize(images.size());
  parallel_for(
      images.size(),
      [&](std::size_t i) {
        rec.per_image[i] = clean_class_curve(predictor, images[i], maps[i], corruption, options, mode);
      },
      workers);
  rec.mean.fractions = rec.per_image.front().fractions;
  rec.mean.probs.assign(rec.mean.fractions.size(), 0.0);
  for (const auto& c : rec.per_image) {
    if (c.probs.size() != rec.mean.probs.size()) throw DimensionError("images have different patch grids");
    for (std::size_t k = 0; k < c.probs.size(); ++k) rec.mean.probs[k] += c.probs[k];
    rec.per_image_auc.push_back(auc(c));
  }
  for (auto& v : rec.mean.probs) v /= static_cast<double>(images.size());
  rec.auc = auc(rec.mean);
  rec.nauc = nauc(rec.mean);
  return rec;
}

std::string curve_csv(const CurveRecord& record) {
  std::ostringstream os;
  os << "# mode=" << to_string(record.mode) << '\n'
     << "# corruption=" << to_string(record.corruption) << '\n'
     << "# method=" << record.method << '\n'
     << "fraction,mean_prob\n";
  for (std::size_t k = 0; k < record.mean.fractions.size(); ++k)
    os << format_double(record.mean.fractions[k]) << ',' << format_double(record.mean.probs[k]) << '\n';
  return os.str();
}

}  // namespace hit::eval
