#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sarship/backbone.hpp"
#include "sarship/imagery.hpp"
#include "sarship/lasm.hpp"

namespace sarship {

struct Detection {
  Box box;
  double score = 0.0;

  bool operator==(const Detection&) const = default;
};

struct DetectorConfig {
  double score_threshold = 0.95;
  double nms_iou = 0.5;
  // Pyramid level used for scoring; 0 is the finest.
  int level = 0;
  // Minimum component size in cells.
  int min_area = 1;

  bool operator==(const DetectorConfig&) const = default;
};

// Throws ConfigError unless both thresholds lie in (0, 1) and min_area >= 1.
void validate(const DetectorConfig& config);

// Channel mean per cell, standardized over the grid (subtract its mean,
// divide by its stddev), through a sigmoid. Zero spread scores 0.5 everywhere.
RealGrid score_map(const FeatureMap& level);
// Standardizes with the statistics of `reference` (same extents) instead.
// The detector passes the unmodulated level so that land suppression is
// not undone by re-standardization.
RealGrid score_map(const FeatureMap& level, const FeatureMap& reference);

// 4-connected components of cells scoring above the threshold, boxes scaled
// by `stride`, scored by their peak cell.
std::vector<Detection> propose(const RealGrid& scores, const DetectorConfig& config, int stride);

double iou(const Box& a, const Box& b);

// Greedy suppression; output ordered by descending score, ties by (y, x).
std::vector<Detection> nms(std::vector<Detection> dets, double nms_iou);

// Everything downstream of the backbone: LASM (when a mask is given), scoring
// on the configured level, proposals, NMS.
std::vector<Detection> detect_from_pyramid(std::span<const FeatureMap> pyramid, int image_width,
                                           const SeaLandMask* mask, const LasmWeights& lasm,
                                           const LasmOptions& lasm_options, const DetectorConfig& config);

// Full pipeline. `mask` must be present iff `scene` is inshore.
std::vector<Detection> detect(const GrayImage& img, SceneLabel scene, const SeaLandMask* mask,
                              const BackboneWeights& backbone, const LasmWeights& lasm,
                              const LasmOptions& lasm_options, const DetectorConfig& config);

struct NamedDetection {
  std::string image;
  Detection detection;
};

// One JSON object per line: {"image", "x", "y", "w", "h", "score"}.
std::string format_detections_jsonl(const std::vector<NamedDetection>& dets);
std::vector<NamedDetection> parse_detections_jsonl(std::string_view text);

}  // namespace sarship
