#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sarship/backbone.hpp"
#include "sarship/detector.hpp"
#include "sarship/lasm.hpp"
#include "sarship/otsu.hpp"
#include "sarship/scene_cluster.hpp"
#include "sarship/synth.hpp"

namespace sarship {

// Ground-truth area strata: small < 32^2 <= medium <= 96^2 < large.
enum class SizeStratum { all, small, medium, large };

struct MetricsReport {
  double map = 0.0;
  double map50 = 0.0;
  double map75 = 0.0;
  double map_s = 0.0;
  double map_m = 0.0;
  double map_l = 0.0;
  // AP at IoU 0.50, 0.55, ..., 0.95.
  std::array<double, 10> per_threshold{};
  std::size_t detections = 0;
  std::size_t ground_truths = 0;
  std::array<std::size_t, 3> ground_truths_by_size{};  // small, medium, large
};

bool in_stratum(long long area, SizeStratum stratum);
std::array<double, 10> coco_iou_thresholds();

// Per-image greedy matching in descending score order: each detection takes
// the unmatched ground truth with the highest IoU >= iou_thresh. Returns the
// matched ground-truth index per detection (input order), or -1.
std::vector<int> match_detections(const std::vector<Detection>& dets, const std::vector<Box>& gts, double iou_thresh);

// AP over a dataset (one detection list and one ground-truth list per image),
// 101-point interpolated. Ground truths outside the stratum are ignored, as
// are detections matching only them and unmatched detections whose own area
// falls outside the stratum. With no ground truth in play, AP is 1 if no
// detection counts and 0 otherwise.
double average_precision(std::span<const std::vector<Detection>> dets, std::span<const std::vector<Box>> gts,
                         double iou_thresh, SizeStratum stratum = SizeStratum::all);
double average_precision(const std::vector<Detection>& dets, const std::vector<Box>& gts, double iou_thresh);

MetricsReport coco_map(std::span<const std::vector<Detection>> dets, std::span<const std::vector<Box>> gts);

std::string format_metrics_table(const MetricsReport& report);
std::string format_metrics_json(const MetricsReport& report);

// Detections and ground truth aligned per image name (sorted). Clutter boxes
// (on_land) are not ships and are dropped.
struct EvalSet {
  std::vector<std::string> images;
  std::vector<std::vector<Detection>> detections;
  std::vector<std::vector<Box>> ground_truth;
};
EvalSet join_by_image(const std::vector<NamedDetection>& dets, const std::vector<NamedGroundTruth>& gts);

struct AblationConfig {
  DetectorConfig detector;
  LasmOptions lasm;
  SegmentOptions segment;
  KMeansOptions kmeans;
  SceneFeatureKind scene_features = SceneFeatureKind::statistics;
};

struct AblationRow {
  int id = 0;
  bool kmeans_gating = false;
  bool lasm_enabled = true;
  MetricsReport metrics;
  // Images that received a sea-land mask.
  std::size_t masked_images = 0;
  // Unmatched detections (IoU 0.5) whose centre lies on true land.
  std::size_t land_false_positives = 0;
};

struct AblationReport {
  // Row 1: K-means gating, masks only for inshore. Row 2: Otsu on every image.
  std::vector<AblationRow> rows;
  // Reference run with LASM disabled everywhere; not part of the table.
  AblationRow baseline;
};

AblationReport run_ablation(const Dataset& dataset, const BackboneWeights& backbone, const LasmWeights& lasm,
                            const AblationConfig& config);

// Header "id\tkmeans\tmap\tmap50" plus one line per row.
std::string format_ablation_tsv(const AblationReport& report);

}  // namespace sarship
