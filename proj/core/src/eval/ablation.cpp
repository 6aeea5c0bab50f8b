#include "hit/eval/ablation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hit/attribution/saliency.hpp"
#include "hit/error.hpp"
#include "hit/parse.hpp"
#include "hit/train/trainer.hpp"

namespace hit::eval {

std::string to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kExcluding: return "excluding-layer";
    case AblationMode::kExclusive: return "exclusive-layer";
    case AblationMode::kCumulativeRemoved: return "cumulative-removed";
    case AblationMode::kCumulativeInserted: return "cumulative-inserted";
  }
  return "";
}

AblationMode parse_ablation_mode(const std::string& text) {
  for (auto m : {AblationMode::kExcluding, AblationMode::kExclusive, AblationMode::kCumulativeRemoved,
                 AblationMode::kCumulativeInserted})
    if (to_string(m) == text) return m;
  throw ConfigError("unknown ablation mode '" + text +
                    "' (expected excluding-layer, exclusive-layer, cumulative-removed or cumulative-inserted)");
}

std::vector<AblationRow> layer_ablation(const model::HitModel<float>& m, const train::Dataset& data,
                                        AblationMode mode, std::span<const int> order, std::size_t workers) {
  const int depth = m.config().depth;
  std::vector<int> seq(order.begin(), order.end());
  if (seq.empty())
    for (int l = depth - 1; l >= 0; --l) seq.push_back(l);
  for (int l : seq)
    if (l < 0 || l >= depth) throw IndexError("ablation layer " + std::to_string(l) + " out of range");

  const auto n = static_cast<std::size_t>(depth);
  std::vector<AblationRow> rows;
  switch (mode) {
    case AblationMode::kExcluding:
      for (std::size_t l = 0; l < n; ++l) {
        AblationRow r{"without-" + std::to_string(l), std::vector<bool>(n, false), 0.0};
        r.dropped[l] = true;
        rows.push_back(std::move(r));
      }
      break;
    case AblationMode::kExclusive:
      for (std::size_t l = 0; l < n; ++l) {
        AblationRow r{"only-" + std::to_string(l), std::vector<bool>(n, true), 0.0};
        r.dropped[l] = false;
        rows.push_back(std::move(r));
      }
      break;
    case AblationMode::kCumulativeRemoved:
    case AblationMode::kCumulativeInserted: {
      const bool removing = mode == AblationMode::kCumulativeRemoved;
      const std::string prefix = removing ? "removed-" : "inserted-";
      AblationRow r{prefix + "none", std::vector<bool>(n, !removing), 0.0};
      rows.push_back(r);
      std::string names;
      for (int l : seq) {
        names += (names.empty() ? "" : "+") + std::to_string(l);
        r.dropped[static_cast<std::size_t>(l)] = removing;
        r.setting = prefix + names;
        rows.push_back(r);
      }
      break;
    }
  }
  for (auto& r : rows) {
    model::ForwardOptions o;
    o.drop_layers = r.dropped;
    r.accuracy = train::evaluate_top1(m, data, o, workers);
  }
  return rows;
}

MeanLayerProfile mean_layer_profile(const model::HitModel<float>& m, std::span<const Image> images,
                                    std::size_t workers) {
  const auto depth = static_cast<std::size_t>(m.config().depth);
  std::vector<attribution::LayerProfile> per(images.size());
  parallel_for(
      images.size(),
      [&](std::size_t i) {
        auto e = attribution::explain_predicted(m, images[i]);
        per[i] = attribution::layerwise_contribution(e.forward.ledger, e.folded, e.map.class_index);
      },
      workers);
  MeanLayerProfile out;
  out.signed_contribution.assign(depth, 0.0);
  out.absolute_contribution.assign(depth, 0.0);
  for (const auto& p : per)
    for (std::size_t l = 0; l < depth; ++l) {
      out.signed_contribution[l] += p.signed_contribution[l];
      out.absolute_contribution[l] += p.absolute_contribution[l];
    }
  if (!images.empty())
    for (std::size_t l = 0; l < depth; ++l) {
      out.signed_contribution[l] /= static_cast<double>(images.size());
      out.absolute_contribution[l] /= static_cast<double>(images.size());
    }
  return out;
}

std::vector<int> contribution_order(const MeanLayerProfile& profile) {
  std::vector<int> order(profile.absolute_contribution.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return profile.absolute_contribution[static_cast<std::size_t>(a)] >
           profile.absolute_contribution[static_cast<std::size_t>(b)];
  });
  return order;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << "setting,accuracy\n";
  for (const auto& r : rows) os << r.setting << ',' << format_double(r.accuracy) << '\n';
  return os.str();
}

std::string layer_profile_csv(const MeanLayerProfile& profile) {
  std::ostringstream os;
  os << "layer,signed,absolute\n";
  for (std::size_t l = 0; l < profile.signed_contribution.size(); ++l)
    os << l << ',' << format_double(profile.signed_contribution[l]) << ','
       << format_double(profile.absolute_contribution[l]) << '\n';
  return os.str();
}

}  // namespace hit::eval
