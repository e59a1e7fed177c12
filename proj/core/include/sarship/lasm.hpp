#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sarship/backbone.hpp"
#include "sarship/imagery.hpp"
#include "sarship/tensor_io.hpp"

namespace sarship {

inline constexpr int kLasmChannels = 256;
inline constexpr int kLasmPoolSize = 7;
inline constexpr int kLasmFlatSize = kLasmPoolSize * kLasmPoolSize * kLasmChannels;  // 12544
inline constexpr int kLasmHidden = 256;

struct ChannelProjection {
  Tensor kernel;  // [256, in]
  Tensor bias;    // [256]

  bool operator==(const ChannelProjection&) const = default;
};

struct LasmWeights {
  // 1x1 projections to 256 channels, keyed by input channel count.
  std::map<int, ChannelProjection> projections;
  Tensor fc1_weight;  // [256, 12544]
  Tensor fc1_bias;    // [256]
  Tensor fc2_weight;  // [1, 256]
  Tensor fc2_bias;    // [1]

  bool operator==(const LasmWeights&) const = default;
};

inline constexpr int kDefaultLasmChannelArray[] = {64, 128, 256};
inline constexpr std::span<const int> kDefaultLasmChannels = kDefaultLasmChannelArray;

// Weights ~ U(-s, s), s = sqrt(1 / fan_in); biases zero.
LasmWeights init_lasm_weights(std::uint64_t seed, std::span<const int> channel_counts = kDefaultLasmChannels);
LasmWeights zero_lasm_weights(std::span<const int> channel_counts = kDefaultLasmChannels);

std::vector<NamedTensor> to_tensors(const LasmWeights& weights);
LasmWeights lasm_from_tensors(const std::vector<NamedTensor>& tensors);
void save_lasm_weights(const LasmWeights& weights, const std::filesystem::path& path);
LasmWeights load_lasm_weights(const std::filesystem::path& path);

// 1x1 convolution to 256 channels. DimensionError if no projection exists
// for the map's channel count.
FeatureMap project_channels(const FeatureMap& fm, const LasmWeights& weights);

// Adaptive 7x7 average pooling (cell r covers rows [floor(r*H/7), floor((r+1)*H/7)))
// then channel-major flatten. Requires 256 channels and H, W >= 7.
std::vector<float> pool_flatten(const FeatureMap& fm);

// tanh(fc2(tanh(fc1(v)))) / 2, so |lambda| < 0.5.
double compute_lambda(std::span<const float> pooled, const LasmWeights& weights);

// Two-valued map: land cells 1 - lambda, sea cells exactly 1.
using AttentionMap = RealGrid;

// Land-indicator form of A = M(1 - lambda) + (I - M), built at mask
// resolution then resampled nearest-neighbour to out_h x out_w.
AttentionMap attention_map(const SeaLandMask& mask, double lambda, int out_h, int out_w);

// out(c, r, x) = fm(c, r, x) * A(r, x).
FeatureMap modulate(const FeatureMap& fm, const AttentionMap& attention);

struct LasmOptions {
  // Replaces the computed lambda on every level.
  std::optional<double> fixed_lambda;
  bool clamp_lambda_nonneg = false;
};

struct LasmResult {
  std::vector<FeatureMap> pyramid;
  // One lambda per level; empty when the pyramid bypassed suppression.
  std::vector<double> lambdas;
};

// No mask (offshore): pyramid returned unchanged. With a mask, each level is
// projected, pooled and reduced to its own lambda, and the original map is
// modulated by that level's attention map.
LasmResult apply_lasm(std::span<const FeatureMap> pyramid, const SeaLandMask* mask, const LasmWeights& weights,
                      const LasmOptions& options = {});

}  // namespace sarship
