#include <benchmark/benchmark.h>

#include "sarship/lasm.hpp"
#include "sarship/synth.hpp"

namespace {

struct Fixture {
  sarship::Scene scene;
  std::vector<sarship::FeatureMap> pyramid;
  sarship::LasmWeights weights = sarship::init_lasm_weights(3);

  Fixture() {
    sarship::SceneSpec spec;
    spec.kind = sarship::SceneLabel::inshore;
    spec.seed = 3;
    scene = sarship::generate_scene(spec);
    pyramid = sarship::build_pyramid(scene.image, sarship::intensity_weights(3));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ComputeLambda(benchmark::State& state) {
  const auto& f = fixture();
  const auto pooled = sarship::pool_flatten(sarship::project_channels(f.pyramid[0], f.weights));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::compute_lambda(pooled, f.weights));
}
BENCHMARK(BM_ComputeLambda)->Unit(benchmark::kMicrosecond);

void BM_AttentionAndModulate(benchmark::State& state) {
  const auto& f = fixture();
  const auto& level = f.pyramid[0];
  for (auto _ : state) {
    const auto a = sarship::attention_map(f.scene.truth_mask, 0.3, level.height, level.width);
    benchmark::DoNotOptimize(sarship::modulate(level, a));
  }
}
BENCHMARK(BM_AttentionAndModulate)->Unit(benchmark::kMicrosecond);

void BM_ApplyLasm(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(sarship::apply_lasm(f.pyramid, &f.scene.truth_mask, f.weights));
}
BENCHMARK(BM_ApplyLasm)->Unit(benchmark::kMillisecond);

}  // namespace
