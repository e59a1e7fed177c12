#include "sarship/pipeline_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sarship/errors.hpp"

namespace sarship {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

}  // namespace

void validate(const PipelineConfig& config) {
  validate(config.detector);
  if (config.fixed_lambda && !std::isfinite(*config.fixed_lambda)) throw ConfigError("fixed_lambda must be finite");
  if (config.kmeans_max_iters < 1) throw ConfigError("kmeans_max_iters must be >= 1");
  if (!(config.kmeans_epsilon > 0.0)) throw ConfigError("kmeans_epsilon must be > 0");
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  PipelineConfig cfg = std::move(base);
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "backbone_weights") cfg.backbone_weights = std::filesystem::path(value);
    else if (key == "lasm_weights") cfg.lasm_weights = std::filesystem::path(value);
    else if (key == "score_threshold") cfg.detector.score_threshold = parse_number<double>(key, value);
    else if (key == "nms_iou") cfg.detector.nms_iou = parse_number<double>(key, value);
    else if (key == "min_area") cfg.detector.min_area = parse_number<int>(key, value);
    else if (key == "level") cfg.detector.level = parse_number<int>(key, value);
    else if (key == "clamp_lambda_nonneg") cfg.clamp_lambda_nonneg = parse_bool(key, value);
    else if (key == "fixed_lambda") cfg.fixed_lambda = parse_number<double>(key, value);
    else if (key == "invert_polarity") cfg.invert_polarity = parse_bool(key, value);
    else if (key == "kmeans") cfg.kmeans = parse_bool(key, value);
    else if (key == "kmeans_max_iters") cfg.kmeans_max_iters = parse_number<int>(key, value);
    else if (key == "kmeans_epsilon") cfg.kmeans_epsilon = parse_number<double>(key, value);
    else if (key == "scene_features") {
      if (value == "stats") cfg.scene_features = SceneFeatureKind::statistics;
      else if (value == "backbone") cfg.scene_features = SceneFeatureKind::backbone;
      else throw ConfigError("scene_features must be 'stats' or 'backbone'");
    }
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_config(text, std::move(base));
}

}  // namespace sarship
