#include <benchmark/benchmark.h>

#include <vector>

#include "hit/attribution/saliency.hpp"
#include "hit/model/hit_model.hpp"
#include "hit/train/dataset.hpp"
#include "hit/train/trainer.hpp"

using namespace hit;

namespace {

const train::Dataset& images() {
  static const auto data = train::synth_quadrant(16, 64, 3);
  return data;
}

const model::HitModel<float>& reference_model() {
  static const auto m = model::HitModel<float>::initialized(model::HitConfig{}, 0);
  return m;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto batch = images().head(static_cast<std::size_t>(state.range(0))).images();
  for (auto _ : state) benchmark::DoNotOptimize(reference_model().forward(batch).logits.data().data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(16)->Arg(64);

void BM_ForwardWithLedger(benchmark::State& state) {
  const auto& image = images().samples[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(model::forward_with_ledger(reference_model(), image).logits.data().data());
}
BENCHMARK(BM_ForwardWithLedger);

void BM_ExplainDouble(benchmark::State& state) {
  const auto m = reference_model().cast<double>();
  const auto& image = images().samples[0].image;
  for (auto _ : state) benchmark::DoNotOptimize(attribution::explain(m, image, 0).map.values.data());
}
BENCHMARK(BM_ExplainDouble);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = images().head(64);
  train::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.warmup_epochs = 0;
  for (auto _ : state) {
    auto result = train::train(reference_model().clone(), cfg, data);
    benchmark::DoNotOptimize(result.step_losses.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
