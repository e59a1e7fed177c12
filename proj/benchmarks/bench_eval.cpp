#include <benchmark/benchmark.h>

#include <random>

#include "sarship/eval.hpp"

namespace {

struct Instance {
  std::vector<std::vector<sarship::Detection>> dets;
  std::vector<std::vector<sarship::Box>> gts;
};

// Jittered copies of each ground truth plus random false positives.
Instance instance(int images, int per_image) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pos(0, 400), ext(4, 40), jitter(-2, 2);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  Instance in;
  in.dets.resize(images);
  in.gts.resize(images);
  for (int i = 0; i < images; ++i) {
    for (int k = 0; k < per_image; ++k) {
      const sarship::Box b{pos(rng), pos(rng), ext(rng), ext(rng)};
      in.gts[i].push_back(b);
      in.dets[i].push_back({{b.x + jitter(rng), b.y + jitter(rng), b.w, b.h}, score(rng)});
      in.dets[i].push_back({{pos(rng), pos(rng), ext(rng), ext(rng)}, score(rng)});
    }
  }
  return in;
}

void BM_AveragePrecision(benchmark::State& state) {
  const auto in = instance(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(sarship::average_precision(in.dets, in.gts, 0.5));
}
BENCHMARK(BM_AveragePrecision)->Arg(100)->Arg(1000);

void BM_CocoMap(benchmark::State& state) {
  const auto in = instance(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(sarship::coco_map(in.dets, in.gts));
}
BENCHMARK(BM_CocoMap)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Nms(benchmark::State& state) {
  const auto in = instance(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::nms(in.dets[0], 0.5));
}
BENCHMARK(BM_Nms)->Arg(50)->Arg(500);

}  // namespace
