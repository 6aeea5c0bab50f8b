#include "hit/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "hit/ad/tape.hpp"
#include "hit/error.hpp"

namespace hit::ad {

GradCheckReport grad_check(const std::function<Tensor<double>(const Tensor<double>&)>& f,
                           const Tensor<double>& x, double step, double tol) {
  GradCheckReport report;
  const std::size_t n = x.numel();

  Tensor<double> probe = x.clone();
  probe.set_requires_grad(true);
  {
    Tape<double> tape;
    Tensor<double> y;
    {
      Tape<double>::Recording rec(tape);
      y = f(probe);
    }
    if (y.numel() != 1) throw ContractError("grad_check: function must be scalar-valued");
    tape.backward(y);
  }
  const auto g = std::as_const(probe).grad();
  report.analytic.assign(n, 0.0);
  if (!g.empty()) std::copy(g.begin(), g.end(), report.analytic.begin());

  report.numeric.resize(n);
  report.relative_error.resize(n);
  Tensor<double> shifted = x.clone();
  auto s = shifted.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double orig = s[i];
    s[i] = orig + step;
    const double fp = f(shifted).item();
    s[i] = orig - step;
    const double fm = f(shifted).item();
    s[i] = orig;
    const double num = (fp - fm) / (2.0 * step);
    const double ana = report.analytic[i];
    const double err = std::abs(ana - num) / std::max({1.0, std::abs(ana), std::abs(num)});
    report.numeric[i] = num;
    report.relative_error[i] = err;
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  report.passed = report.max_relative_error <= tol;
  return report;
}

}  // namespace hit::ad
