#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sarship/detector.hpp"
#include "sarship/scene_cluster.hpp"

namespace sarship {

// key=value settings shared by the CLI subcommands. '#' starts a comment.
// Keys: seed, backbone_weights, lasm_weights, score_threshold, nms_iou,
// min_area, level, clamp_lambda_nonneg, fixed_lambda, invert_polarity,
// kmeans, kmeans_max_iters, kmeans_epsilon, scene_features (stats | backbone).
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> backbone_weights;
  std::optional<std::filesystem::path> lasm_weights;
  DetectorConfig detector;
  bool clamp_lambda_nonneg = false;
  std::optional<double> fixed_lambda;
  bool invert_polarity = false;
  // false reproduces the Otsu-on-every-image configuration.
  bool kmeans = true;
  int kmeans_max_iters = 100;
  double kmeans_epsilon = 1e-6;
  SceneFeatureKind scene_features = SceneFeatureKind::statistics;
};

// Applies `text` on top of `base`. Unknown keys and invalid values throw ConfigError.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

// Re-checks every field (used after command-line overrides).
void validate(const PipelineConfig& config);

}  // namespace sarship
