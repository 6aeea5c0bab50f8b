#pragma once

#include <span>
#include <vector>

namespace hit::eval {

/// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// |Pearson correlation|; 0 when either input has zero variance.
double pearson_abs(std::span<const double> a, std::span<const double> b);
/// |Spearman correlation| (Pearson on average ranks); 0 on zero variance.
double spearman_abs(std::span<const double> a, std::span<const double> b);

}  // namespace hit::eval
