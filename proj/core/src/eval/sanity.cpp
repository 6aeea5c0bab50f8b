#include "hit/eval/sanity.hpp"

#include <random>
#include <sstream>

#include "hit/error.hpp"
#include "hit/eval/correlation.hpp"
#include "hit/parse.hpp"
#include "hit/posthoc/posthoc.hpp"
#include "hit/train/trainer.hpp"

namespace hit::eval {

bool is_saliency_method(const std::string& name) {
  return name == "ledger" || name == "rollout" || name == "gradcam" || name == "random";
}

MapFn saliency_method(const std::string& name, int gradcam_layer, std::uint64_t seed) {
  if (name == "ledger")
    return [](const model::HitModel<float>& m, const Image& img, int cls, std::size_t) {
      return attribution::explain(m, img, cls).map;
    };
  if (name == "rollout")
    return [](const model::HitModel<float>& m, const Image& img, int cls, std::size_t) {
      auto map = posthoc::rollout_hit(m, img);
      map.class_index = cls;
      return map;
    };
  if (name == "gradcam")
    return [gradcam_layer](const model::HitModel<float>& m, const Image& img, int cls, std::size_t) {
      return posthoc::gradcam_hit(m, img, cls, gradcam_layer);
    };
  if (name == "random")
    return [seed](const model::HitModel<float>& m, const Image&, int cls, std::size_t index) {
      auto map = posthoc::random_map(static_cast<std::size_t>(m.config().grid_side()), seed + index);
      map.class_index = cls;
      return map;
    };
  throw ConfigError("unknown saliency method '" + name + "' (expected ledger, rollout, gradcam or random)");
}

SanityReport cascading_randomization(const model::HitModel<float>& m, std::span<const Image> images,
                                     const MapFn& method, std::uint64_t seed, std::size_t workers) {
  if (images.empty()) throw ContractError("randomization check needs at least one image");
  const auto classes = train::predict(m, images, {}, workers);
  std::vector<attribution::SaliencyMap> original(images.size());
  parallel_for(
      images.size(), [&](std::size_t i) { original[i] = method(m, images[i], classes[i], i); }, workers);

  auto compare = [&](const model::HitModel<float>& current, const std::string& name) {
    std::vector<double> rho(images.size()), r(images.size());
    parallel_for(
        images.size(),
        [&](std::size_t i) {
          const auto map = method(current, images[i], classes[i], i);
          rho[i] = spearman_abs(original[i].values, map.values);
          r[i] = pearson_abs(original[i].values, map.values);
        },
        workers);
    SanityStage s{name, 0.0, 0.0};
    for (std::size_t i = 0; i < images.size(); ++i) {
      s.spearman_abs += rho[i];
      s.pearson_abs += r[i];
    }
    s.spearman_abs /= static_cast<double>(images.size());
    s.pearson_abs /= static_cast<double>(images.size());
    return s;
  };

  SanityReport report;
  report.stages.push_back(compare(m, "none"));
  model::HitModel<float> current = m.clone();
  std::mt19937_64 rng(seed);
  model::init_head(current.params(), rng);
  report.stages.push_back(compare(current, "head"));
  for (int l = m.config().depth - 1; l >= 0; --l) {
    model::init_block(current.params().blocks[static_cast<std::size_t>(l)], rng);
    report.stages.push_back(compare(current, "block-" + std::to_string(l)));
  }
  return report;
}

std::string sanity_csv(const SanityReport& report) {
  std::ostringstream os;
  os << "stage,spearman_abs,pearson_abs\n";
  for (const auto& s : report.stages)
    os << s.name << ',' << format_double(s.spearman_abs) << ',' << format_double(s.pearson_abs) << '\n';
  return os.str();
}

}  // namespace hit::eval
