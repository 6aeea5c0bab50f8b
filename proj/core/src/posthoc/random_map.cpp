#include <random>

#include "hit/posthoc/posthoc.hpp"

namespace hit::posthoc {

SaliencyMap random_map(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  SaliencyMap out;
  out.side = side;
  out.values.resize(side * side);
  for (auto& v : out.values) v = uniform(rng);
  return out;
}

}  // namespace hit::posthoc
