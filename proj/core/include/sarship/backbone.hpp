#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sarship/imagery.hpp"
#include "sarship/tensor_io.hpp"

namespace sarship {

// Channel-major C x H x W feature tensor.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0f);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  float at(int c, int r, int col) const { return values[c * plane_size() + static_cast<std::size_t>(r) * width + col]; }
  float& at(int c, int r, int col) { return values[c * plane_size() + static_cast<std::size_t>(r) * width + col]; }
  std::span<const float> plane(int c) const { return std::span(values).subspan(c * plane_size(), plane_size()); }
  std::span<float> plane(int c) { return std::span(values).subspan(c * plane_size(), plane_size()); }

  bool operator==(const FeatureMap&) const = default;
};

// Image as a 1-channel map scaled to [0, 1].
FeatureMap to_feature_map(const GrayImage& img);

// Cross-correlation with zero padding. `kernel` is [out, in, kh, kw], `bias`
// has `out` entries (empty means zero). Output extent per axis is
// floor((in + 2 * padding - k) / stride) + 1.
FeatureMap conv2d(const FeatureMap& input, const Tensor& kernel, std::span<const float> bias, int stride,
                  int padding);

void relu_inplace(FeatureMap& fm);
// 2x2 average pooling with stride 2.
FeatureMap avg_pool2(const FeatureMap& fm);

// One pyramid level: conv (same padding) -> ReLU -> `pools` 2x2 average pools.
struct BackboneStage {
  Tensor kernel;  // [out, in, k, k]
  Tensor bias;    // [out]
  int pools = 1;

  int out_channels() const { return kernel.dim(0); }
  int in_channels() const { return kernel.dim(1); }

  bool operator==(const BackboneStage&) const = default;
};

struct BackboneWeights {
  std::vector<BackboneStage> stages;

  std::size_t level_count() const { return stages.size(); }
  // Cumulative stride of every level relative to the input image.
  std::vector<int> strides() const;
  int total_stride() const;

  bool operator==(const BackboneWeights&) const = default;
};

// Default plan: three 3x3 stages, 64/128/256 channels at strides 4/8/16.
// Kernels ~ U(-s, s), s = sqrt(1 / fan_in); biases zero.
BackboneWeights init_weights(std::uint64_t seed);

// init_weights with channel 0 of every level replaced by a strided local
// average of the input; the remaining channels are scaled by `random_gain`.
BackboneWeights intensity_weights(std::uint64_t seed, float random_gain = 0.25f);

std::vector<NamedTensor> to_tensors(const BackboneWeights& weights);
// Throws FormatError when the tensors do not describe a consistent plan.
BackboneWeights backbone_from_tensors(const std::vector<NamedTensor>& tensors);
void save_weights(const BackboneWeights& weights, const std::filesystem::path& path);
BackboneWeights load_weights(const std::filesystem::path& path);

// Throws DimensionError unless both image extents divide by total_stride().
std::vector<FeatureMap> build_pyramid(const GrayImage& img, const BackboneWeights& weights);

}  // namespace sarship
