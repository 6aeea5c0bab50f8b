#pragma once

#include <cstddef>
#include <vector>

#include "hit/model/params.hpp"

namespace hit::train {

using ad::Tensor;

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// Adam with decoupled weight decay. Decay applies only to parameters for
/// which model::decays(name) holds.
template <class T>
class AdamW {
 public:
  AdamW(const model::NamedTensors<T>& params, AdamWOptions options);

  /// One update with learning rate `lr` from the gradients currently held.
  void step(double lr);
  void zero_grad();
  std::size_t steps() const noexcept { return steps_; }

 private:
  struct Slot {
    Tensor<T> param;
    bool decay = false;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  AdamWOptions options_;
  std::size_t steps_ = 0;
};

/// Linear warmup over `warmup_steps` to `base`, then cosine decay to base/100
/// at `total_steps`.
double scheduled_lr(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base);

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace hit::train
