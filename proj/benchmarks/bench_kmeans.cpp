#include <benchmark/benchmark.h>

#include "sarship/scene_cluster.hpp"
#include "sarship/synth.hpp"

namespace {

std::vector<sarship::GrayImage> images(int n) {
  const auto ds = sarship::generate_dataset(sarship::SceneSpec{}, n, 0.3, 2);
  std::vector<sarship::GrayImage> out;
  for (const auto& s : ds.scenes) out.push_back(s.image);
  return out;
}

void BM_SceneFeature(benchmark::State& state) {
  const auto img = images(1).front();
  for (auto _ : state) benchmark::DoNotOptimize(sarship::scene_feature(img));
}
BENCHMARK(BM_SceneFeature);

void BM_KMeans2(benchmark::State& state) {
  std::vector<sarship::FeatureVector> features;
  for (const auto& img : images(static_cast<int>(state.range(0)))) features.push_back(sarship::scene_feature(img));
  for (auto _ : state) benchmark::DoNotOptimize(sarship::kmeans2(features));
}
BENCHMARK(BM_KMeans2)->Arg(40)->Arg(200)->Arg(1000);

}  // namespace
