#include "sarship/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>

#include "json.hpp"
#include "sarship/errors.hpp"

namespace sarship {

namespace {

constexpr long long kSmallLimit = 32LL * 32;
constexpr long long kMediumLimit = 96LL * 96;
constexpr int kRecallPoints = 101;

struct RankedDetection {
  std::size_t image;
  std::size_t index;
  double score;
};

// Descending score; ties keep (image, index) order.
std::vector<RankedDetection> rank_all(std::span<const std::vector<Detection>> dets) {
  std::vector<RankedDetection> ranked;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < dets[i].size(); ++j) ranked.push_back({i, j, dets[i][j].score});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDetection& a, const RankedDetection& b) { return a.score > b.score; });
  return ranked;
}

// Best unmatched ground truth among those with the given ignore flag.
int best_match(const Box& det, const std::vector<Box>& gts, const std::vector<std::uint8_t>& taken,
               const std::vector<std::uint8_t>& ignored, bool want_ignored, double iou_thresh) {
  int best = -1;
  double best_iou = iou_thresh;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (taken[g] || static_cast<bool>(ignored[g]) != want_ignored) continue;
    const double o = iou(det, gts[g]);
    if (o >= best_iou && (best == -1 || o > best_iou)) {
      best = static_cast<int>(g);
      best_iou = o;
    }
  }
  return best;
}

double interpolated_ap(const std::vector<double>& recall, const std::vector<double>& precision) {
  std::vector<double> envelope = precision;
  for (std::size_t i = envelope.size(); i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  double sum = 0.0;
  std::size_t pos = 0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = k / 100.0;
    while (pos < recall.size() && recall[pos] < r) ++pos;
    if (pos < recall.size()) sum += envelope[pos];
  }
  return sum / kRecallPoints;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

bool in_stratum(long long area, SizeStratum stratum) {
  switch (stratum) {
    case SizeStratum::small: return area < kSmallLimit;
    case SizeStratum::medium: return area >= kSmallLimit && area <= kMediumLimit;
    case SizeStratum::large: return area > kMediumLimit;
    case SizeStratum::all: break;
  }
  return true;
}

std::array<double, 10> coco_iou_thresholds() {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[i] = (50 + 5 * i) / 100.0;
  return t;
}

std::vector<int> match_detections(const std::vector<Detection>& dets, const std::vector<Box>& gts, double iou_thresh) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<std::uint8_t> taken(gts.size(), 0);
  const std::vector<std::uint8_t> none(gts.size(), 0);
  std::vector<int> match(dets.size(), -1);
  for (std::size_t d : order) {
    const int g = best_match(dets[d].box, gts, taken, none, false, iou_thresh);
    if (g >= 0) {
      taken[g] = 1;
      match[d] = g;
    }
  }
  return match;
}

double average_precision(std::span<const std::vector<Detection>> dets, std::span<const std::vector<Box>> gts,
                         double iou_thresh, SizeStratum stratum) {
  if (dets.size() != gts.size()) throw DimensionError("detections and ground truth cover different image counts");

  std::vector<std::vector<std::uint8_t>> ignored(gts.size());
  std::vector<std::vector<std::uint8_t>> taken(gts.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    ignored[i].resize(gts[i].size());
    taken[i].assign(gts[i].size(), 0);
    for (std::size_t g = 0; g < gts[i].size(); ++g) {
      ignored[i][g] = in_stratum(gts[i][g].area(), stratum) ? 0 : 1;
      if (!ignored[i][g]) ++positives;
    }
  }

  std::size_t tp = 0;
  std::size_t fp = 0;
  std::vector<double> recall;
  std::vector<double> precision;
  for (const auto& rd : rank_all(dets)) {
    const Box& box = dets[rd.image][rd.index].box;
    const auto& img_gts = gts[rd.image];
    int g = best_match(box, img_gts, taken[rd.image], ignored[rd.image], false, iou_thresh);
    if (g >= 0) {
      taken[rd.image][g] = 1;
      ++tp;
    } else {
      g = best_match(box, img_gts, taken[rd.image], ignored[rd.image], true, iou_thresh);
      if (g >= 0) {
        taken[rd.image][g] = 1;
        continue;
      }
      if (!in_stratum(box.area(), stratum)) continue;
      ++fp;
    }
    if (positives > 0) {
      recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
      precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
  }

  if (positives == 0) return fp == 0 ? 1.0 : 0.0;
  return interpolated_ap(recall, precision);
}

double average_precision(const std::vector<Detection>& dets, const std::vector<Box>& gts, double iou_thresh) {
  return average_precision(std::span(&dets, 1), std::span(&gts, 1), iou_thresh);
}

MetricsReport coco_map(std::span<const std::vector<Detection>> dets, std::span<const std::vector<Box>> gts) {
  MetricsReport report;
  for (const auto& d : dets) report.detections += d.size();
  for (const auto& g : gts) {
    report.ground_truths += g.size();
    for (const auto& b : g) {
      if (in_stratum(b.area(), SizeStratum::small)) ++report.ground_truths_by_size[0];
      else if (in_stratum(b.area(), SizeStratum::medium)) ++report.ground_truths_by_size[1];
      else ++report.ground_truths_by_size[2];
    }
  }

  const auto thresholds = coco_iou_thresholds();
  auto sweep = [&](SizeStratum stratum, std::array<double, 10>* per) {
    double sum = 0.0;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const double ap = average_precision(dets, gts, thresholds[t], stratum);
      if (per) (*per)[t] = ap;
      sum += ap;
    }
    return sum / static_cast<double>(thresholds.size());
  };
  report.map = sweep(SizeStratum::all, &report.per_threshold);
  report.map50 = report.per_threshold[0];
  report.map75 = report.per_threshold[5];
  report.map_s = sweep(SizeStratum::small, nullptr);
  report.map_m = sweep(SizeStratum::medium, nullptr);
  report.map_l = sweep(SizeStratum::large, nullptr);
  return report;
}

std::string format_metrics_table(const MetricsReport& r) {
  std::string out = "metric  value\n";
  out += "mAP     " + fmt(r.map) + "\n";
  out += "mAP50   " + fmt(r.map50) + "\n";
  out += "mAP75   " + fmt(r.map75) + "\n";
  out += "mAP_S   " + fmt(r.map_s) + "  (" + std::to_string(r.ground_truths_by_size[0]) + " gt)\n";
  out += "mAP_M   " + fmt(r.map_m) + "  (" + std::to_string(r.ground_truths_by_size[1]) + " gt)\n";
  out += "mAP_L   " + fmt(r.map_l) + "  (" + std::to_string(r.ground_truths_by_size[2]) + " gt)\n";
  out += "detections " + std::to_string(r.detections) + ", ground truths " + std::to_string(r.ground_truths) + "\n";
  return out;
}

std::string format_metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["map"] = r.map;
  j["map50"] = r.map50;
  j["map75"] = r.map75;
  j["map_s"] = r.map_s;
  j["map_m"] = r.map_m;
  j["map_l"] = r.map_l;
  j["per_threshold"] = r.per_threshold;
  j["detections"] = r.detections;
  j["ground_truths"] = r.ground_truths;
  j["ground_truths_by_size"] = {{"small", r.ground_truths_by_size[0]},
                                {"medium", r.ground_truths_by_size[1]},
                                {"large", r.ground_truths_by_size[2]}};
  return j.dump(2) + "\n";
}

EvalSet join_by_image(const std::vector<NamedDetection>& dets, const std::vector<NamedGroundTruth>& gts) {
  std::map<std::string, std::size_t> slot;
  for (const auto& d : dets) slot.emplace(d.image, 0);
  for (const auto& g : gts) slot.emplace(g.image, 0);
  EvalSet set;
  for (auto& [name, index] : slot) {
    index = set.images.size();
    set.images.push_back(name);
  }
  set.detections.resize(set.images.size());
  set.ground_truth.resize(set.images.size());
  for (const auto& d : dets) set.detections[slot[d.image]].push_back(d.detection);
  for (const auto& g : gts) {
    if (!g.box.on_land) set.ground_truth[slot[g.image]].push_back(g.box.box);
  }
  return set;
}

AblationReport run_ablation(const Dataset& dataset, const BackboneWeights& backbone, const LasmWeights& lasm,
                            const AblationConfig& config) {
  validate(config.detector);
  const std::size_t n = dataset.scenes.size();

  std::vector<GrayImage> images;
  std::vector<std::vector<Box>> gts;
  images.reserve(n);
  for (const auto& s : dataset.scenes) {
    images.push_back(s.image);
    gts.push_back(s.ship_boxes());
  }
  const std::vector<SceneLabel> gated = config.scene_features == SceneFeatureKind::backbone
                                            ? classify_scenes(images, backbone, config.kmeans)
                                            : classify_scenes(images, config.kmeans);

  struct Run {
    AblationRow row;
    std::vector<std::vector<Detection>> dets;
  };
  Run full{{1, true, true, {}, 0, 0}, std::vector<std::vector<Detection>>(n)};
  Run otsu_only{{2, false, true, {}, 0, 0}, std::vector<std::vector<Detection>>(n)};
  Run no_lasm{{0, false, false, {}, 0, 0}, std::vector<std::vector<Detection>>(n)};

  for (std::size_t i = 0; i < n; ++i) {
    const auto pyramid = build_pyramid(images[i], backbone);
    const SeaLandMask mask = segment(images[i], config.segment);
    const int w = images[i].width();

    const SeaLandMask* gated_mask = gated[i] == SceneLabel::inshore ? &mask : nullptr;
    full.dets[i] = detect_from_pyramid(pyramid, w, gated_mask, lasm, config.lasm, config.detector);
    otsu_only.dets[i] = detect_from_pyramid(pyramid, w, &mask, lasm, config.lasm, config.detector);
    no_lasm.dets[i] = detect_from_pyramid(pyramid, w, nullptr, lasm, config.lasm, config.detector);
    if (gated_mask) ++full.row.masked_images;
    ++otsu_only.row.masked_images;
  }

  for (Run* run : {&full, &otsu_only, &no_lasm}) {
    run->row.metrics = coco_map(run->dets, gts);
    for (std::size_t i = 0; i < n; ++i) {
      const auto match = match_detections(run->dets[i], gts[i], 0.5);
      const SeaLandMask& truth = dataset.scenes[i].truth_mask;
      for (std::size_t d = 0; d < match.size(); ++d) {
        if (match[d] >= 0) continue;
        const Box& b = run->dets[i][d].box;
        const int cy = std::clamp(b.center_y(), 0, truth.height() - 1);
        const int cx = std::clamp(b.center_x(), 0, truth.width() - 1);
        if (truth.is_land(cy, cx)) ++run->row.land_false_positives;
      }
    }
  }

  AblationReport report;
  report.rows = {full.row, otsu_only.row};
  report.baseline = no_lasm.row;
  return report;
}

std::string format_ablation_tsv(const AblationReport& report) {
  std::string out = "id\tkmeans\tmap\tmap50\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.id) + "\t" + (row.kmeans_gating ? "yes" : "no") + "\t" + fmt(row.metrics.map) + "\t" +
           fmt(row.metrics.map50) + "\n";
  }
  return out;
}

}  // namespace sarship
