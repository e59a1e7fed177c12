#include "sarship/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "sarship/errors.hpp"

namespace sarship {

void validate(const DetectorConfig& config) {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(config.score_threshold)) throw ConfigError("score_threshold must lie in (0, 1)");
  if (!open_unit(config.nms_iou)) throw ConfigError("nms_iou must lie in (0, 1)");
  if (config.level < 0) throw ConfigError("level must be >= 0");
  if (config.min_area < 1) throw ConfigError("min_area must be >= 1");
}

namespace {

std::vector<double> channel_mean_plane(const FeatureMap& fm) {
  if (fm.channels < 1) throw DimensionError("score_map needs at least one channel");
  const std::size_t plane = fm.plane_size();
  std::vector<double> out(plane, 0.0);
  for (int c = 0; c < fm.channels; ++c) {
    const auto p = fm.plane(c);
    for (std::size_t i = 0; i < plane; ++i) out[i] += p[i];
  }
  for (auto& v : out) v /= fm.channels;
  return out;
}

}  // namespace

RealGrid score_map(const FeatureMap& level) { return score_map(level, level); }

RealGrid score_map(const FeatureMap& level, const FeatureMap& reference) {
  if (reference.height != level.height || reference.width != level.width) {
    throw DimensionError("score reference extents differ from the scored map");
  }
  const auto values = channel_mean_plane(level);
  const auto ref = &reference == &level ? values : channel_mean_plane(reference);
  double sum = 0.0;
  for (double v : ref) sum += v;
  const double mean = sum / static_cast<double>(ref.size());
  double var = 0.0;
  for (double v : ref) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(ref.size()));

  RealGrid scores(level.height, level.width, 0.5);
  if (!(stddev > 0.0)) return scores;
  auto out = scores.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-(values[i] - mean) / stddev));
  }
  return scores;
}

std::vector<Detection> propose(const RealGrid& scores, const DetectorConfig& config, int stride) {
  const int h = scores.height();
  const int w = scores.width();
  std::vector<std::uint8_t> visited(scores.size(), 0);
  std::vector<Detection> out;
  std::vector<std::pair<int, int>> stack;

  for (int r0 = 0; r0 < h; ++r0) {
    for (int c0 = 0; c0 < w; ++c0) {
      const std::size_t seed = static_cast<std::size_t>(r0) * w + c0;
      if (visited[seed] || !(scores.at(r0, c0) > config.score_threshold)) continue;

      int rmin = r0, rmax = r0, cmin = c0, cmax = c0, area = 0;
      double peak = 0.0;
      visited[seed] = 1;
      stack.assign(1, {r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        ++area;
        peak = std::max(peak, scores.at(r, c));
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        constexpr int kDr[] = {-1, 1, 0, 0};
        constexpr int kDc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = r + kDr[k];
          const int nc = c + kDc[k];
          if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
          const std::size_t n = static_cast<std::size_t>(nr) * w + nc;
          if (visited[n] || !(scores.at(nr, nc) > config.score_threshold)) continue;
          visited[n] = 1;
          stack.emplace_back(nr, nc);
        }
      }
      if (area < config.min_area) continue;
      out.push_back(
          {Box{cmin * stride, rmin * stride, (cmax - cmin + 1) * stride, (rmax - rmin + 1) * stride}, peak});
    }
  }
  return out;
}

double iou(const Box& a, const Box& b) {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<Detection> nms(std::vector<Detection> dets, double nms_iou) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
  });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const Detection& k) { return iou(k.box, d.box) > nms_iou; });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> detect_from_pyramid(std::span<const FeatureMap> pyramid, int image_width,
                                           const SeaLandMask* mask, const LasmWeights& lasm,
                                           const LasmOptions& lasm_options, const DetectorConfig& config) {
  validate(config);
  if (config.level >= static_cast<int>(pyramid.size())) throw ConfigError("detector level exceeds pyramid depth");
  const LasmResult modulated = apply_lasm(pyramid, mask, lasm, lasm_options);
  const auto index = static_cast<std::size_t>(config.level);
  const FeatureMap& level = modulated.pyramid[index];
  const int stride = image_width / level.width;
  return nms(propose(score_map(level, pyramid[index]), config, stride), config.nms_iou);
}

std::vector<Detection> detect(const GrayImage& img, SceneLabel scene, const SeaLandMask* mask,
                              const BackboneWeights& backbone, const LasmWeights& lasm,
                              const LasmOptions& lasm_options, const DetectorConfig& config) {
  if ((scene == SceneLabel::inshore) != (mask != nullptr)) {
    throw ConfigError("a sea-land mask must be supplied exactly for inshore scenes");
  }
  if (mask != nullptr && (mask->width() != img.width() || mask->height() != img.height())) {
    throw DimensionError("mask and image extents differ");
  }
  const auto pyramid = build_pyramid(img, backbone);
  return detect_from_pyramid(pyramid, img.width(), mask, lasm, lasm_options, config);
}

std::string format_detections_jsonl(const std::vector<NamedDetection>& dets) {
  std::string out;
  for (const auto& [image, d] : dets) {
    nlohmann::ordered_json j;
    j["image"] = image;
    j["x"] = d.box.x;
    j["y"] = d.box.y;
    j["w"] = d.box.w;
    j["h"] = d.box.h;
    j["score"] = d.score;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<NamedDetection> parse_detections_jsonl(std::string_view text) {
  std::vector<NamedDetection> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      NamedDetection nd;
      nd.image = j.at("image").get<std::string>();
      nd.detection.box = Box{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
      nd.detection.score = j.at("score").get<double>();
      out.push_back(std::move(nd));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad detection line: ") + e.what());
    }
  }
  return out;
}

}  // namespace sarship
