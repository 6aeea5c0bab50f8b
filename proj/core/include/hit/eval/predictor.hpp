#pragma once

#include <span>
#include <vector>

#include "hit/io/image.hpp"
#include "hit/model/hit_model.hpp"

namespace hit::eval {

/// Anything that maps images to class probabilities on a patch grid.
class Predictor {
 public:
  virtual ~Predictor() = default;
  /// Row i holds the class probabilities of images[i].
  virtual std::vector<std::vector<double>> predict_proba(std::span<const Image> images) const = 0;
  virtual int patch_size() const = 0;
};

/// Softmax of a HiT model's logits, evaluated in batches.
class HitPredictor final : public Predictor {
 public:
  explicit HitPredictor(const model::HitModel<float>& model, std::size_t batch = 64) : model_(model), batch_(batch) {}
  std::vector<std::vector<double>> predict_proba(std::span<const Image> images) const override;
  int patch_size() const override { return model_.config().patch_size; }

 private:
  const model::HitModel<float>& model_;
  std::size_t batch_;
};

/// Numerically stable softmax of one logit row.
std::vector<double> softmax_row(std::span<const double> logits);

}  // namespace hit::eval
