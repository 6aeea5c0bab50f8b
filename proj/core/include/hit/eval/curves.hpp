#pragma once

#include <span>
#include <string>
#include <vector>

#include "hit/attribution/saliency.hpp"
#include "hit/eval/corruption.hpp"
#include "hit/eval/predictor.hpp"
#include "hit/parallel.hpp"

namespace hit::eval {

using attribution::SaliencyMap;

enum class CurveMode { kInsertion, kDeletion };
std::string to_string(CurveMode mode);
CurveMode parse_curve_mode(const std::string& text);

struct Curve {
  std::vector<double> fractions;  // 0, 1/M, ..., 1
  std::vector<double> probs;
};

/// Cell indices by descending value; equal values keep row-major order.
std::vector<std::size_t> rank_cells(const SaliencyMap& map);

/// Images after 0..M steps: insertion pastes original patches into
/// `corrupted` in rank order, deletion pastes corrupted patches into the
/// original.
std::vector<Image> perturbation_sequence(const Image& image, const Image& corrupted,
                                         std::span<const std::size_t> order, int patch_size, CurveMode mode);

/// Probability of `target_class` at every step, endpoints included.
Curve perturbation_curve(const Predictor& predictor, const Image& image, const Image& corrupted,
                         const SaliencyMap& map, CurveMode mode, int target_class);

struct CurveOptions {
  double blur_sigma = 5.0;
  int blur_kernel = 11;
};

/// Tracks the class predicted on the clean image.
Curve insertion_curve(const Predictor& predictor, const Image& image, const SaliencyMap& map, Corruption corruption,
                      const CurveOptions& options = {});
Curve deletion_curve(const Predictor& predictor, const Image& image, const SaliencyMap& map, Corruption corruption,
                     const CurveOptions& options = {});

/// Trapezoid rule over the fraction axis.
double auc(const Curve& curve);

struct NormalizedAuc {
  double value = 0.5;
  bool degenerate = false;  // max - min < 1e-9; value is then 0.5
};
/// AUC of the curve min-max normalized to [0, 1].
NormalizedAuc nauc(const Curve& curve);

struct CurveRecord {
  CurveMode mode = CurveMode::kInsertion;
  Corruption corruption = Corruption::kZero;
  std::string method;
  Curve mean;  // mean probability per step over all images
  std::vector<Curve> per_image;
  std::vector<double> per_image_auc;
  double auc = 0.0;
  NormalizedAuc nauc;
};

/// Per-image curves (fanned out over `workers`), then the mean curve and its
/// AUC / nAUC.
CurveRecord evaluate_curves(const Predictor& predictor, std::span<const Image> images,
                            std::span<const SaliencyMap> maps, CurveMode mode, Corruption corruption,
                            const std::string& method, const CurveOptions& options = {},
                            std::size_t workers = worker_count());

/// "# mode=", "# corruption=", "# method=" lines, then "fraction,mean_prob".
std::string curve_csv(const CurveRecord& record);

}  // namespace hit::eval
