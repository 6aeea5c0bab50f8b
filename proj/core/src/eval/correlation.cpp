#include "hit/eval/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hit/error.hpp"

namespace hit::eval {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("correlation of sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  if (a.size() < 2) throw DimensionError("correlation needs at least two values");
}

}  // namespace

double pearson_abs(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return std::min(1.0, std::abs(sab) / std::sqrt(saa * sbb));
}

double spearman_abs(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_abs(ra, rb);
}

}  // namespace hit::eval
