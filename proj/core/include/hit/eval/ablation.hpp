#pragma once

#include <span>
#include <string>
#include <vector>

#include "hit/model/hit_model.hpp"
#include "hit/parallel.hpp"
#include "hit/train/dataset.hpp"

namespace hit::eval {

enum class AblationMode { kExcluding, kExclusive, kCumulativeRemoved, kCumulativeInserted };
std::string to_string(AblationMode mode);
AblationMode parse_ablation_mode(const std::string& text);

struct AblationRow {
  std::string setting;
  std::vector<bool> dropped;  // layers whose MHA output was withheld from the CLS
  double accuracy = 0.0;
};

/// Accuracy with layers withheld. Excluding drops one layer at a time,
/// exclusive keeps one; the cumulative modes first evaluate the unchanged
/// (removed) or empty (inserted) model, then remove/insert layers one by one
/// following `order` (default: deepest first).
std::vector<AblationRow> layer_ablation(const model::HitModel<float>& model, const train::Dataset& data,
                                        AblationMode mode, std::span<const int> order = {},
                                        std::size_t workers = worker_count());

/// Mean over images of each layer's contribution to the predicted-class logit.
struct MeanLayerProfile {
  std::vector<double> signed_contribution;
  std::vector<double> absolute_contribution;  // mean of per-image |signed|
};
MeanLayerProfile mean_layer_profile(const model::HitModel<float>& model, std::span<const Image> images,
                                    std::size_t workers = worker_count());

/// Layers sorted by decreasing mean absolute contribution (ties: deeper first).
std::vector<int> contribution_order(const MeanLayerProfile& profile);

/// "setting,accuracy".
std::string ablation_csv(std::span<const AblationRow> rows);
/// "layer,signed,absolute".
std::string layer_profile_csv(const MeanLayerProfile& profile);

}  // namespace hit::eval
