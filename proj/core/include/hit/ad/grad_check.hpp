#pragma once

#include <functional>
#include <vector>

#include "hit/ad/tensor.hpp"

namespace hit::ad {

struct GradCheckReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  std::vector<double> relative_error;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Compares the reverse-mode gradient of a scalar function with central
/// differences. The relative error of element i is
/// |a_i - n_i| / max(1, |a_i|, |n_i|).
GradCheckReport grad_check(const std::function<Tensor<double>(const Tensor<double>&)>& f,
                           const Tensor<double>& x, double step = 1e-3, double tol = 1e-4);

}  // namespace hit::ad
