#include "sarship/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sarship/errors.hpp"

namespace sarship {

namespace {

struct StagePlan {
  int out_channels;
  int kernel_size;
  int pools;
};

constexpr StagePlan kDefaultPlan[] = {{64, 3, 2}, {128, 3, 1}, {256, 3, 1}};

// Range of output indices whose input tap (o * stride + tap - padding) lands in [0, extent).
std::pair<int, int> valid_range(int out_extent, int in_extent, int stride, int tap, int padding) {
  const int offset = tap - padding;
  int lo = 0;
  if (offset < 0) lo = (-offset + stride - 1) / stride;
  int hi = out_extent;  // exclusive
  const int limit = in_extent - 1 - offset;
  if (limit < 0) return {0, 0};
  hi = std::min(hi, limit / stride + 1);
  return {lo, std::max(lo, hi)};
}

}  // namespace

FeatureMap::FeatureMap(int c, int h, int w, float fill)
    : channels(c), height(h), width(w), values(static_cast<std::size_t>(c) * h * w, fill) {
  if (c < 0 || h < 0 || w < 0) throw DimensionError("negative feature map extent");
}

FeatureMap to_feature_map(const GrayImage& img) {
  FeatureMap fm(1, img.height(), img.width());
  for (std::size_t i = 0; i < img.size(); ++i) fm.values[i] = static_cast<float>(img.pixels()[i]) / 255.0f;
  return fm;
}

FeatureMap conv2d(const FeatureMap& input, const Tensor& kernel, std::span<const float> bias, int stride,
                  int padding) {
  if (kernel.shape.size() != 4) throw DimensionError("conv kernel must be [out, in, kh, kw]");
  const int out_c = kernel.dim(0);
  const int in_c = kernel.dim(1);
  const int kh = kernel.dim(2);
  const int kw = kernel.dim(3);
  if (in_c != input.channels) {
    throw DimensionError("conv kernel expects " + std::to_string(in_c) + " channels, input has " +
                         std::to_string(input.channels));
  }
  if (stride < 1 || padding < 0) throw DimensionError("conv stride must be >= 1 and padding >= 0");
  if (!bias.empty() && static_cast<int>(bias.size()) != out_c) throw DimensionError("conv bias length mismatch");
  const int oh = (input.height + 2 * padding - kh) / stride + 1;
  const int ow = (input.width + 2 * padding - kw) / stride + 1;
  if (input.height + 2 * padding < kh || input.width + 2 * padding < kw) {
    throw DimensionError("conv kernel larger than padded input");
  }

  FeatureMap out(out_c, oh, ow);
  const float* w = kernel.values.data();
  for (int o = 0; o < out_c; ++o) {
    auto dst = out.plane(o);
    if (!bias.empty()) std::fill(dst.begin(), dst.end(), bias[o]);
    for (int i = 0; i < in_c; ++i) {
      const auto src = input.plane(i);
      for (int ky = 0; ky < kh; ++ky) {
        const auto [y0, y1] = valid_range(oh, input.height, stride, ky, padding);
        for (int kx = 0; kx < kw; ++kx) {
          const float wt = *w++;
          if (wt == 0.0f) continue;
          const auto [x0, x1] = valid_range(ow, input.width, stride, kx, padding);
          for (int oy = y0; oy < y1; ++oy) {
            const float* s = src.data() + static_cast<std::size_t>(oy * stride + ky - padding) * input.width +
                             (kx - padding);
            float* d = dst.data() + static_cast<std::size_t>(oy) * ow;
            if (stride == 1) {
              for (int ox = x0; ox < x1; ++ox) d[ox] += wt * s[ox];
            } else {
              for (int ox = x0; ox < x1; ++ox) d[ox] += wt * s[ox * stride];
            }
          }
        }
      }
    }
  }
  return out;
}

void relu_inplace(FeatureMap& fm) {
  for (auto& v : fm.values) v = std::max(v, 0.0f);
}

FeatureMap avg_pool2(const FeatureMap& fm) {
  FeatureMap out(fm.channels, fm.height / 2, fm.width / 2);
  for (int c = 0; c < fm.channels; ++c) {
    for (int r = 0; r < out.height; ++r) {
      for (int x = 0; x < out.width; ++x) {
        out.at(c, r, x) = 0.25f * (fm.at(c, 2 * r, 2 * x) + fm.at(c, 2 * r, 2 * x + 1) +
                                   fm.at(c, 2 * r + 1, 2 * x) + fm.at(c, 2 * r + 1, 2 * x + 1));
      }
    }
  }
  return out;
}

std::vector<int> BackboneWeights::strides() const {
  std::vector<int> out;
  int stride = 1;
  for (const auto& s : stages) {
    stride <<= s.pools;
    out.push_back(stride);
  }
  return out;
}

int BackboneWeights::total_stride() const {
  const auto s = strides();
  return s.empty() ? 1 : s.back();
}

BackboneWeights init_weights(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BackboneWeights weights;
  int in_c = 1;
  for (const auto& plan : kDefaultPlan) {
    const int fan_in = in_c * plan.kernel_size * plan.kernel_size;
    const float s = std::sqrt(1.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> u(-s, s);
    BackboneStage stage;
    stage.kernel = Tensor({plan.out_channels, in_c, plan.kernel_size, plan.kernel_size});
    for (auto& v : stage.kernel.values) v = u(rng);
    stage.bias = Tensor(std::vector<int>{plan.out_channels});
    stage.pools = plan.pools;
    weights.stages.push_back(std::move(stage));
    in_c = plan.out_channels;
  }
  return weights;
}

BackboneWeights intensity_weights(std::uint64_t seed, float random_gain) {
  BackboneWeights weights = init_weights(seed);
  for (std::size_t si = 0; si < weights.stages.size(); ++si) {
    auto& stage = weights.stages[si];
    for (auto& v : stage.kernel.values) v *= random_gain;
    const int in_c = stage.in_channels();
    const int k = stage.kernel.dim(2);
    const std::size_t taps = static_cast<std::size_t>(k) * k;
    // Output channel 0 occupies the first in_c * k * k kernel entries.
    std::fill(stage.kernel.values.begin(), stage.kernel.values.begin() + static_cast<std::ptrdiff_t>(in_c * taps),
              0.0f);
    if (si == 0) {
      std::fill(stage.kernel.values.begin(), stage.kernel.values.begin() + static_cast<std::ptrdiff_t>(taps),
                1.0f / static_cast<float>(taps));
    } else {
      // Centre tap of the previous level's intensity channel.
      stage.kernel.values[taps / 2] = 1.0f;
    }
    stage.bias.values[0] = 0.0f;
  }
  return weights;
}

std::vector<NamedTensor> to_tensors(const BackboneWeights& weights) {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < weights.stages.size(); ++i) {
    const auto& s = weights.stages[i];
    const std::string prefix = "stage" + std::to_string(i);
    out.push_back({prefix + ".kernel", s.kernel});
    out.push_back({prefix + ".bias", s.bias});
    out.push_back({prefix + ".pools", Tensor(std::vector<int>{1}, std::vector<float>{static_cast<float>(s.pools)})});
  }
  return out;
}

BackboneWeights backbone_from_tensors(const std::vector<NamedTensor>& tensors) {
  BackboneWeights weights;
  int in_c = 1;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "stage" + std::to_string(i);
    const Tensor* kernel = find_tensor(tensors, prefix + ".kernel");
    if (kernel == nullptr) break;
    if (kernel->shape.size() != 4 || kernel->dim(1) != in_c || kernel->dim(2) != kernel->dim(3) ||
        kernel->dim(2) % 2 == 0 || kernel->dim(0) < 1) {
      throw FormatError(prefix + ".kernel does not fit the channel plan");
    }
    BackboneStage stage;
    stage.kernel = *kernel;
    stage.bias = require_tensor(tensors, prefix + ".bias", {kernel->dim(0)});
    const float pools = require_tensor(tensors, prefix + ".pools", {1}).values[0];
    if (pools < 0.0f || pools > 8.0f || pools != std::floor(pools)) {
      throw FormatError(prefix + ".pools must be a small non-negative integer");
    }
    stage.pools = static_cast<int>(pools);
    in_c = kernel->dim(0);
    weights.stages.push_back(std::move(stage));
  }
  if (weights.stages.empty()) throw FormatError("weights file has no backbone stages");
  return weights;
}

void save_weights(const BackboneWeights& weights, const std::filesystem::path& path) {
  save_tensors(to_tensors(weights), path);
}

BackboneWeights load_weights(const std::filesystem::path& path) {
  return backbone_from_tensors(load_tensors(path));
}

std::vector<FeatureMap> build_pyramid(const GrayImage& img, const BackboneWeights& weights) {
  const int total = weights.total_stride();
  if (img.empty() || img.width() % total != 0 || img.height() % total != 0) {
    throw DimensionError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                         " is not divisible by the backbone stride " + std::to_string(total));
  }
  std::vector<FeatureMap> levels;
  FeatureMap current = to_feature_map(img);
  for (const auto& stage : weights.stages) {
    current = conv2d(current, stage.kernel, stage.bias.values, 1, stage.kernel.dim(2) / 2);
    relu_inplace(current);
    for (int p = 0; p < stage.pools; ++p) current = avg_pool2(current);
    levels.push_back(current);
  }
  return levels;
}

}  // namespace sarship
