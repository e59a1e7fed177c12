#include "sarship/lasm.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sarship/errors.hpp"

namespace sarship {

namespace {

void fill_uniform(Tensor& t, int fan_in, std::mt19937_64& rng) {
  const float s = std::sqrt(1.0f / static_cast<float>(fan_in));
  std::uniform_real_distribution<float> u(-s, s);
  for (auto& v : t.values) v = u(rng);
}

LasmWeights shaped_weights(std::span<const int> channel_counts) {
  LasmWeights w;
  for (int c : channel_counts) {
    if (c < 1) throw DimensionError("projection input channels must be positive");
    w.projections[c] = {Tensor({kLasmChannels, c}), Tensor(std::vector<int>{kLasmChannels})};
  }
  w.fc1_weight = Tensor({kLasmHidden, kLasmFlatSize});
  w.fc1_bias = Tensor(std::vector<int>{kLasmHidden});
  w.fc2_weight = Tensor({1, kLasmHidden});
  w.fc2_bias = Tensor(std::vector<int>{1});
  return w;
}

// tanh rounds to +-1 once |z| exceeds ~19; the exact value is strictly inside.
double strict_tanh(double z) {
  const double t = std::tanh(z);
  if (std::abs(t) >= 1.0) return std::copysign(std::nextafter(1.0, 0.0), t);
  return t;
}

}  // namespace

LasmWeights zero_lasm_weights(std::span<const int> channel_counts) { return shaped_weights(channel_counts); }

LasmWeights init_lasm_weights(std::uint64_t seed, std::span<const int> channel_counts) {
  LasmWeights w = shaped_weights(channel_counts);
  std::mt19937_64 rng(seed);
  for (auto& [c, proj] : w.projections) fill_uniform(proj.kernel, c, rng);
  fill_uniform(w.fc1_weight, kLasmFlatSize, rng);
  fill_uniform(w.fc2_weight, kLasmHidden, rng);
  return w;
}

std::vector<NamedTensor> to_tensors(const LasmWeights& weights) {
  std::vector<NamedTensor> out;
  for (const auto& [c, proj] : weights.projections) {
    const std::string prefix = "proj" + std::to_string(c);
    out.push_back({prefix + ".kernel", proj.kernel});
    out.push_back({prefix + ".bias", proj.bias});
  }
  out.push_back({"fc1.weight", weights.fc1_weight});
  out.push_back({"fc1.bias", weights.fc1_bias});
  out.push_back({"fc2.weight", weights.fc2_weight});
  out.push_back({"fc2.bias", weights.fc2_bias});
  return out;
}

LasmWeights lasm_from_tensors(const std::vector<NamedTensor>& tensors) {
  LasmWeights w;
  for (const auto& nt : tensors) {
    const std::string_view name = nt.name;
    if (!name.starts_with("proj") || !name.ends_with(".kernel")) continue;
    const std::string digits(name.substr(4, name.size() - 4 - 7));
    int c = 0;
    try {
      c = std::stoi(digits);
    } catch (const std::exception&) {
      throw FormatError("bad projection tensor name " + nt.name);
    }
    if (c < 1) throw FormatError("bad projection tensor name " + nt.name);
    const std::string prefix = "proj" + std::to_string(c);
    w.projections[c] = {require_tensor(tensors, prefix + ".kernel", {kLasmChannels, c}),
                        require_tensor(tensors, prefix + ".bias", {kLasmChannels})};
  }
  w.fc1_weight = require_tensor(tensors, "fc1.weight", {kLasmHidden, kLasmFlatSize});
  w.fc1_bias = require_tensor(tensors, "fc1.bias", {kLasmHidden});
  w.fc2_weight = require_tensor(tensors, "fc2.weight", {1, kLasmHidden});
  w.fc2_bias = require_tensor(tensors, "fc2.bias", {1});
  return w;
}

void save_lasm_weights(const LasmWeights& weights, const std::filesystem::path& path) {
  save_tensors(to_tensors(weights), path);
}

LasmWeights load_lasm_weights(const std::filesystem::path& path) { return lasm_from_tensors(load_tensors(path)); }

FeatureMap project_channels(const FeatureMap& fm, const LasmWeights& weights) {
  const auto it = weights.projections.find(fm.channels);
  if (it == weights.projections.end()) {
    throw DimensionError("no channel projection for " + std::to_string(fm.channels) + " channels");
  }
  const auto& proj = it->second;
  FeatureMap out(kLasmChannels, fm.height, fm.width);
  const std::size_t plane = fm.plane_size();
  for (int o = 0; o < kLasmChannels; ++o) {
    auto dst = out.plane(o);
    std::fill(dst.begin(), dst.end(), proj.bias.values[o]);
    const float* row = proj.kernel.values.data() + static_cast<std::size_t>(o) * fm.channels;
    for (int i = 0; i < fm.channels; ++i) {
      const float w = row[i];
      if (w == 0.0f) continue;
      const auto src = fm.plane(i);
      for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
    }
  }
  return out;
}

std::vector<float> pool_flatten(const FeatureMap& fm) {
  if (fm.channels != kLasmChannels) throw DimensionError("pool_flatten expects a 256-channel map");
  if (fm.height < kLasmPoolSize || fm.width < kLasmPoolSize) {
    throw DimensionError("pool_flatten needs at least 7x7 spatial extent");
  }
  std::vector<float> out;
  out.reserve(kLasmFlatSize);
  for (int c = 0; c < fm.channels; ++c) {
    for (int r = 0; r < kLasmPoolSize; ++r) {
      const int r0 = r * fm.height / kLasmPoolSize;
      const int r1 = (r + 1) * fm.height / kLasmPoolSize;
      for (int q = 0; q < kLasmPoolSize; ++q) {
        const int c0 = q * fm.width / kLasmPoolSize;
        const int c1 = (q + 1) * fm.width / kLasmPoolSize;
        double sum = 0.0;
        for (int y = r0; y < r1; ++y) {
          for (int x = c0; x < c1; ++x) sum += fm.at(c, y, x);
        }
        out.push_back(static_cast<float>(sum / ((r1 - r0) * (c1 - c0))));
      }
    }
  }
  return out;
}

double compute_lambda(std::span<const float> pooled, const LasmWeights& weights) {
  if (pooled.size() != static_cast<std::size_t>(kLasmFlatSize)) {
    throw DimensionError("lambda input must have 12544 entries");
  }
  double z = weights.fc2_bias.values[0];
  for (int j = 0; j < kLasmHidden; ++j) {
    const float* row = weights.fc1_weight.values.data() + static_cast<std::size_t>(j) * kLasmFlatSize;
    double acc = weights.fc1_bias.values[j];
    for (int n = 0; n < kLasmFlatSize; ++n) acc += static_cast<double>(row[n]) * pooled[n];
    z += weights.fc2_weight.values[j] * std::tanh(acc);
  }
  return strict_tanh(z) / 2.0;
}

AttentionMap attention_map(const SeaLandMask& mask, double lambda, int out_h, int out_w) {
  if (!std::isfinite(lambda)) throw DimensionError("lambda must be finite");
  const double land_weight = 1.0 - lambda;
  RealGrid a(mask.height(), mask.width(), 1.0);
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask.is_land(r, c)) a.at(r, c) = land_weight;
    }
  }
  return resize_nearest(a, out_h, out_w);
}

FeatureMap modulate(const FeatureMap& fm, const AttentionMap& attention) {
  if (attention.height() != fm.height || attention.width() != fm.width) {
    throw DimensionError("attention map and feature map extents differ");
  }
  FeatureMap out = fm;
  const auto a = attention.values();
  const std::size_t plane = fm.plane_size();
  for (int c = 0; c < fm.channels; ++c) {
    auto p = out.plane(c);
    for (std::size_t i = 0; i < plane; ++i) {
      if (a[i] != 1.0) p[i] = static_cast<float>(p[i] * a[i]);
    }
  }
  return out;
}

LasmResult apply_lasm(std::span<const FeatureMap> pyramid, const SeaLandMask* mask, const LasmWeights& weights,
                      const LasmOptions& options) {
  LasmResult result;
  if (mask == nullptr) {
    result.pyramid.assign(pyramid.begin(), pyramid.end());
    return result;
  }
  for (const auto& level : pyramid) {
    double lambda = options.fixed_lambda ? *options.fixed_lambda
                                         : compute_lambda(pool_flatten(project_channels(level, weights)), weights);
    if (options.clamp_lambda_nonneg) lambda = std::max(lambda, 0.0);
    result.lambdas.push_back(lambda);
    result.pyramid.push_back(modulate(level, attention_map(*mask, lambda, level.height, level.width)));
  }
  return result;
}

}  // namespace sarship
