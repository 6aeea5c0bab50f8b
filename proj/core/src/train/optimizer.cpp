#include "hit/train/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace hit::train {

template <class T>
AdamW<T>::AdamW(const model::NamedTensors<T>& params, AdamWOptions options) : options_(options) {
  for (const auto& [name, t] : params) {
    Slot s;
    s.param = t;
    s.decay = model::decays(name);
    s.m.assign(t.numel(), 0.0);
    s.v.assign(t.numel(), 0.0);
    slots_.push_back(std::move(s));
  }
}

template <class T>
void AdamW<T>::step(double lr) {
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (auto& s : slots_) {
    auto p = s.param.data();
    auto g = std::as_const(s.param).grad();
    const double shrink = s.decay ? 1.0 - lr * options_.weight_decay : 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double grad = g.empty() ? 0.0 : static_cast<double>(g[i]);
      s.m[i] = b1 * s.m[i] + (1.0 - b1) * grad;
      s.v[i] = b2 * s.v[i] + (1.0 - b2) * grad * grad;
      const double update = (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + options_.eps);
      p[i] = static_cast<T>(static_cast<double>(p[i]) * shrink - lr * update);
    }
  }
}

template <class T>
void AdamW<T>::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

double scheduled_lr(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base) {
  if (step < warmup_steps) return base * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  const double floor = base / 100.0;
  const std::size_t span = total_steps > warmup_steps ? total_steps - warmup_steps : 1;
  const double progress = std::min(1.0, static_cast<double>(step - warmup_steps) / static_cast<double>(span));
  return floor + (base - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace hit::train
