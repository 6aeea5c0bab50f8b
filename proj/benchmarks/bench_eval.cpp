#include <benchmark/benchmark.h>

#include "hit/eval/correlation.hpp"
#include "hit/eval/corruption.hpp"
#include "hit/eval/curves.hpp"
#include "hit/eval/predictor.hpp"
#include "hit/posthoc/posthoc.hpp"
#include "hit/train/dataset.hpp"

using namespace hit;

namespace {

const train::Dataset& images() {
  static const auto data = train::synth_quadrant(4, 64, 5);
  return data;
}

const model::HitModel<float>& reference_model() {
  static const auto m = model::HitModel<float>::initialized(model::HitConfig{}, 0);
  return m;
}

void BM_Rollout(benchmark::State& state) {
  const auto& image = images().samples[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(posthoc::rollout_hit(reference_model(), image).values.data());
}
BENCHMARK(BM_Rollout);

void BM_GradCam(benchmark::State& state) {
  const auto& image = images().samples[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(posthoc::gradcam_hit(reference_model(), image, 0).values.data());
}
BENCHMARK(BM_GradCam);

void BM_Blur(benchmark::State& state) {
  const auto& image = images().samples[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(eval::corrupt_blur(image).pixels.data());
}
BENCHMARK(BM_Blur);

void BM_InsertionCurve(benchmark::State& state) {
  const auto& image = images().samples[0].image;
  const eval::HitPredictor predictor(reference_model());
  const auto map = posthoc::rollout_hit(reference_model(), image);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval::insertion_curve(predictor, image, map, eval::Corruption::kZero).probs.data());
}
BENCHMARK(BM_InsertionCurve)->Unit(benchmark::kMillisecond);

void BM_Spearman(benchmark::State& state) {
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>((i * 7919) % 101);
    b[i] = static_cast<double>((i * 104729) % 97);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::spearman_abs(a, b));
}
BENCHMARK(BM_Spearman)->Arg(64)->Arg(4096);

}  // namespace
