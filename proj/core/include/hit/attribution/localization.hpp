#pragma once

#include <optional>
#include <span>

#include "hit/attribution/saliency.hpp"

namespace hit::attribution {

/// Pixel rectangle, half-open: rows [y0, y1), cols [x0, x1).
struct Region {
  int y0 = 0, x0 = 0, y1 = 0, x1 = 0;
  bool operator==(const Region&) const = default;
};

struct CellPoint {
  double row = 0.0;
  double col = 0.0;
};

/// Mass-weighted mean cell coordinate after shifting the map by its
/// minimum. Empty when the shifted map has no mass (constant map).
std::optional<CellPoint> center_of_mass(const SaliencyMap& map);

/// Whether a point in cell coordinates lies in `region`; cell (r, c) spans
/// pixels [r*p, (r+1)*p), so its center sits at pixel (r + 0.5) * p.
bool region_contains(const Region& region, const CellPoint& point, int patch_size);

struct HitRate {
  double rate = 0.0;           // hits / evaluated (0 when nothing evaluated)
  std::size_t hits = 0;
  std::size_t evaluated = 0;   // maps with a defined center
  std::size_t degenerate = 0;  // excluded maps without mass
};

HitRate region_hit_rate(std::span<const SaliencyMap> maps, std::span<const Region> regions, int patch_size);

}  // namespace hit::attribution
