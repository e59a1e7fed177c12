#include <benchmark/benchmark.h>

#include "sarship/otsu.hpp"
#include "sarship/synth.hpp"

namespace {

sarship::GrayImage scene(int size) {
  sarship::SceneSpec spec;
  spec.width = spec.height = size;
  spec.kind = sarship::SceneLabel::inshore;
  spec.seed = 1;
  return sarship::generate_scene(spec).image;
}

void BM_Histogram(benchmark::State& state) {
  const auto img = scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::histogram(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_Histogram)->Arg(128)->Arg(512)->Arg(1024);

void BM_OtsuThreshold(benchmark::State& state) {
  const auto h = sarship::histogram(scene(256));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::otsu_threshold(h));
}
BENCHMARK(BM_OtsuThreshold);

void BM_Segment(benchmark::State& state) {
  const auto img = scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::segment(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_Segment)->Arg(128)->Arg(512)->Arg(1024);

}  // namespace
