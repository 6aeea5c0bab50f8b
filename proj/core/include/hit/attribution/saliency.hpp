#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hit/model/fold.hpp"
#include "hit/model/hit_model.hpp"

namespace hit::attribution {

/// Class-specific scalar map on the finest (input) patch grid, row-major.
struct SaliencyMap {
  int class_index = -1;  // -1 for class-agnostic maps (rollout, random)
  std::size_t side = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * side + col]; }
  double sum() const;
};

/// Contribution of each layer to one class logit.
struct LayerProfile {
  int class_index = -1;
  std::vector<double> signed_contribution;
  std::vector<double> absolute_contribution;  // |signed| per layer
};

/// Repeated transposed 2x2 pooling: every cell is spread evenly over the
/// 4^pools finest cells it covers, so the total is preserved.
std::vector<double> upsample_through_pools(std::span<const double> map, std::size_t side, int pools);

/// Number of 2x2 pooling stages separating a grid of `side` from `input_side`.
int pools_between(std::size_t input_side, std::size_t side);

/// Runs the head on every ledger entry and sums the layers on the finest
/// grid. Cells add up to the class logit.
template <class T>
SaliencyMap saliency_from_ledger(const model::ContributionLedger<T>& ledger, const model::FoldedLogits<T>& folded,
                                 int class_index);

template <class T>
LayerProfile layerwise_contribution(const model::ContributionLedger<T>& ledger,
                                    const model::FoldedLogits<T>& folded, int class_index);

/// Ledger forward, fold and saliency for one image in a single call.
template <class T>
struct Explanation {
  model::LedgerForward<T> forward;
  model::FoldedLogits<T> folded;
  SaliencyMap map;
  double logit = 0.0;  // model logit of the explained class
};
template <class T>
Explanation<T> explain(const model::HitModel<T>& model, const Image& image, int class_index);
/// Same, explaining the predicted class.
template <class T>
Explanation<T> explain_predicted(const model::HitModel<T>& model, const Image& image);

/// Nearest-neighbour enlargement of a map by an integer factor.
SaliencyMap upscale_nearest(const SaliencyMap& map, std::size_t factor);

/// "row,col,value" CSV; a "# method=<name>" line precedes the header when
/// `method` is non-empty.
std::string saliency_csv(const SaliencyMap& map, const std::string& method = "");
/// Min maps to 0, max to 255; a constant map renders black.
std::vector<std::uint8_t> render_gray(const SaliencyMap& map);
void write_saliency_pgm(const std::filesystem::path& path, const SaliencyMap& map);

}  // namespace hit::attribution
