#include "hit/attribution/localization.hpp"

#include <algorithm>

#include "hit/error.hpp"

namespace hit::attribution {

std::optional<CellPoint> center_of_mass(const SaliencyMap& map) {
  if (map.values.empty()) return std::nullopt;
  const double lo = *std::min_element(map.values.begin(), map.values.end());
  double mass = 0.0, row = 0.0, col = 0.0;
  for (std::size_t r = 0; r < map.side; ++r)
    for (std::size_t c = 0; c < map.side; ++c) {
      const double w = map.at(r, c) - lo;
      mass += w;
      row += w * static_cast<double>(r);
      col += w * static_cast<double>(c);
    }
  if (!(mass > 0.0)) return std::nullopt;
  return CellPoint{row / mass, col / mass};
}

bool region_contains(const Region& region, const CellPoint& point, int patch_size) {
  const double y = (point.row + 0.5) * patch_size;
  const double x = (point.col + 0.5) * patch_size;
  return y >= region.y0 && y <= region.y1 && x >= region.x0 && x <= region.x1;
}

HitRate region_hit_rate(std::span<const SaliencyMap> maps, std::span<const Region> regions, int patch_size) {
  if (maps.size() != regions.size())
    throw DimensionError(std::to_string(maps.size()) + " maps but " + std::to_string(regions.size()) + " regions");
  HitRate out;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    auto center = center_of_mass(maps[i]);
    if (!center) {
      ++out.degenerate;
      continue;
    }
    ++out.evaluated;
    if (region_contains(regions[i], *center, patch_size)) ++out.hits;
  }
  if (out.evaluated > 0) out.rate = static_cast<double>(out.hits) / static_cast<double>(out.evaluated);
  return out;
}

}  // namespace hit::attribution
