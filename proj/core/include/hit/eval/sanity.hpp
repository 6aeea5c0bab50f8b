#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hit/attribution/saliency.hpp"
#include "hit/model/hit_model.hpp"
#include "hit/parallel.hpp"

namespace hit::eval {

/// Saliency generator: (model, image, class, image index) -> finest-grid map.
using MapFn = std::function<attribution::SaliencyMap(const model::HitModel<float>&, const Image&, int, std::size_t)>;

/// "ledger", "rollout", "gradcam" or "random". Random maps use seed + index.
MapFn saliency_method(const std::string& name, int gradcam_layer = -1, std::uint64_t seed = 0);
bool is_saliency_method(const std::string& name);

struct SanityStage {
  std::string name;  // "none", "head", "block-<l>"
  double spearman_abs = 0.0;
  double pearson_abs = 0.0;
};

struct SanityReport {
  std::vector<SanityStage> stages;
};

/// Re-initializes the classifier head, then blocks from deepest to shallowest,
/// cumulatively; after each stage regenerates the maps for the originally
/// predicted classes and averages |Spearman| and |Pearson| against the
/// original maps. The first stage ("none") randomizes nothing.
SanityReport cascading_randomization(const model::HitModel<float>& model, std::span<const Image> images,
                                     const MapFn& method, std::uint64_t seed, std::size_t workers = worker_count());

/// "stage,spearman_abs,pearson_abs".
std::string sanity_csv(const SanityReport& report);

}  // namespace hit::eval
