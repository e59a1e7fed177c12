#include <benchmark/benchmark.h>

#include <random>

#include "sarship/backbone.hpp"

namespace {

void BM_Conv3x3(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), size = static_cast<int>(state.range(1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  sarship::FeatureMap x(c, size, size);
  for (auto& v : x.values) v = d(rng);
  sarship::Tensor k({c, c, 3, 3});
  for (auto& v : k.values) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(sarship::conv2d(x, k, {}, 1, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c) * c * 9 * size * size);
}
BENCHMARK(BM_Conv3x3)->Args({16, 32})->Args({64, 32})->Args({128, 16})->Unit(benchmark::kMillisecond);

void BM_BuildPyramid(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(size) * size);
  for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
  const sarship::GrayImage img(size, size, std::move(px));
  const auto w = sarship::intensity_weights(1);
  for (auto _ : state) benchmark::DoNotOptimize(sarship::build_pyramid(img, w));
}
BENCHMARK(BM_BuildPyramid)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
