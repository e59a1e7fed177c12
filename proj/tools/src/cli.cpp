#include "sarship/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sarship/backbone.hpp"
#include "sarship/detector.hpp"
#include "sarship/errors.hpp"
#include "sarship/eval.hpp"
#include "sarship/imagery.hpp"
#include "sarship/lasm.hpp"
#include "sarship/otsu.hpp"
#include "sarship/pipeline_config.hpp"
#include "sarship/scene_cluster.hpp"
#include "sarship/synth.hpp"

namespace sarship::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string config;
  std::uint64_t seed = 0;
  double fixed_lambda = 0.0;
  bool invert_polarity = false;
  bool no_kmeans = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
};

PipelineConfig resolve_config(const GlobalFlags& g) {
  PipelineConfig cfg;
  if (!g.config.empty()) cfg = load_config(g.config);
  if (g.seed_opt->count() > 0) cfg.seed = g.seed;
  if (g.lambda_opt->count() > 0) cfg.fixed_lambda = g.fixed_lambda;
  if (g.invert_polarity) cfg.invert_polarity = true;
  if (g.no_kmeans) cfg.kmeans = false;
  validate(cfg);
  return cfg;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_image_file(const fs::path& p) {
  const std::string name = p.filename().string();
  const std::string ext = p.extension().string();
  return name.starts_with("img_") && (ext == ".pgm" || ext == ".png");
}

// img_* files, sorted by name.
std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  if (out.empty()) throw InputError("no img_* images in " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Accepts both `<name>\t<label>` and the dataset form `<index>\t<label>`.
std::map<std::string, SceneLabel> read_scenes(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::map<std::string, SceneLabel> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("bad scenes line: " + line);
    std::string name = line.substr(0, tab);
    if (all_digits(name)) name = image_file_name(std::stoul(name));
    out[name] = parse_scene_label(line.substr(tab + 1));
  }
  return out;
}

BackboneWeights backbone_for(const PipelineConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return load_weights(flag);
  if (cfg.backbone_weights) return load_weights(*cfg.backbone_weights);
  return intensity_weights(cfg.seed);
}

LasmWeights lasm_for(const PipelineConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return load_lasm_weights(flag);
  if (cfg.lasm_weights) return load_lasm_weights(*cfg.lasm_weights);
  return init_lasm_weights(cfg.seed);
}

LasmOptions lasm_options(const PipelineConfig& cfg) {
  return LasmOptions{cfg.fixed_lambda, cfg.clamp_lambda_nonneg};
}

KMeansOptions kmeans_options(const PipelineConfig& cfg) {
  return KMeansOptions{cfg.seed, cfg.kmeans_max_iters, cfg.kmeans_epsilon};
}

struct SynthArgs {
  std::string out;
  int n = 10;
  double inshore_fraction = 0.3;
  SceneSpec spec;
};

int cmd_synth(const PipelineConfig& cfg, const SynthArgs& a) {
  if (a.n < 1) throw ConfigError("--n must be >= 1");
  if (!(a.inshore_fraction >= 0.0 && a.inshore_fraction <= 1.0)) {
    throw ConfigError("--inshore-fraction must lie in [0, 1]");
  }
  validate(a.spec);
  const Dataset ds = generate_dataset(a.spec, a.n, a.inshore_fraction, cfg.seed);
  write_dataset(ds, a.out);
  return kExitOk;
}

struct ClassifyArgs {
  std::string images;
  std::string backbone;
  std::string out;
};

int cmd_classify(const PipelineConfig& cfg, const ClassifyArgs& a) {
  const auto paths = list_images(a.images);
  std::vector<GrayImage> images;
  for (const auto& p : paths) images.push_back(load_image(p));
  // Without K-means gating every image goes down the inshore branch.
  std::vector<SceneLabel> labels(images.size(), SceneLabel::inshore);
  if (cfg.kmeans && cfg.scene_features == SceneFeatureKind::backbone) {
    labels = classify_scenes(images, backbone_for(cfg, a.backbone), kmeans_options(cfg));
  } else if (cfg.kmeans) {
    labels = classify_scenes(images, kmeans_options(cfg));
  }
  std::string text;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    text += paths[i].filename().string() + "\t" + std::string(to_string(labels[i])) + "\n";
  }
  write_file_atomic(a.out, text);
  return kExitOk;
}

struct SegmentArgs {
  std::string images;
  std::string out;
};

int cmd_segment(const PipelineConfig& cfg, const SegmentArgs& a) {
  const auto paths = list_images(a.images);
  const SegmentOptions opts{cfg.invert_polarity};
  std::vector<SeaLandMask> masks;
  std::string table;
  for (const auto& p : paths) {
    const GrayImage img = load_image(p);
    const OtsuResult otsu = otsu_threshold(histogram(img));
    masks.push_back(threshold_mask(img, otsu, opts));
    table += p.filename().string() + "\t" + std::to_string(otsu.threshold) + "\t" +
             (otsu.no_separation ? "1" : "0") + "\n";
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    save_mask(masks[i], fs::path(a.out) / paths[i].filename().replace_extension(".pgm"));
  }
  write_file_atomic(fs::path(a.out) / "thresholds.tsv", table);
  return kExitOk;
}

struct DetectArgs {
  std::string images;
  std::string scenes;
  std::string masks;
  std::string backbone;
  std::string lasm;
  std::string out;
};

int cmd_detect(const PipelineConfig& cfg, const DetectArgs& a) {
  // Weights first: a bad weight file must fail before anything is written.
  const BackboneWeights backbone = backbone_for(cfg, a.backbone);
  const LasmWeights lasm = lasm_for(cfg, a.lasm);
  const auto scenes = read_scenes(a.scenes);
  const auto paths = list_images(a.images);

  std::vector<NamedDetection> all;
  for (const auto& p : paths) {
    const std::string name = p.filename().string();
    const auto it = scenes.find(name);
    if (it == scenes.end()) throw FormatError("no scene label for " + name);
    const GrayImage img = load_image(p);
    std::optional<SeaLandMask> mask;
    if (it->second == SceneLabel::inshore) {
      if (a.masks.empty()) throw InputError("inshore image " + name + " needs --masks");
      mask = load_mask(fs::path(a.masks) / fs::path(name).replace_extension(".pgm"));
      if (mask->width() != img.width() || mask->height() != img.height()) {
        throw FormatError("mask size differs from image " + name);
      }
    }
    for (const Detection& d : detect(img, it->second, mask ? &*mask : nullptr, backbone, lasm, lasm_options(cfg),
                                     cfg.detector)) {
      all.push_back({name, d});
    }
  }
  write_file_atomic(a.out, format_detections_jsonl(all));
  return kExitOk;
}

struct EvalArgs {
  std::string detections;
  std::string gt;
  std::string out;
  std::string table;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto dets = parse_detections_jsonl(read_text(a.detections));
  const auto gts = parse_ground_truth_jsonl(read_text(a.gt));
  const EvalSet set = join_by_image(dets, gts);
  const MetricsReport report = coco_map(set.detections, set.ground_truth);
  const std::string table = format_metrics_table(report);
  write_file_atomic(a.out, format_metrics_json(report));
  if (!a.table.empty()) write_file_atomic(a.table, table);
  out << table;
  return kExitOk;
}

struct AblateArgs {
  std::string dataset;
  std::string backbone;
  std::string lasm;
  std::string out;
};

int cmd_ablate(const PipelineConfig& cfg, const AblateArgs& a, std::ostream& out) {
  const BackboneWeights backbone = backbone_for(cfg, a.backbone);
  const LasmWeights lasm = lasm_for(cfg, a.lasm);
  const Dataset ds = read_dataset(a.dataset);
  AblationConfig ac;
  ac.detector = cfg.detector;
  ac.lasm = lasm_options(cfg);
  ac.segment.invert_polarity = cfg.invert_polarity;
  ac.kmeans = kmeans_options(cfg);
  ac.scene_features = cfg.scene_features;
  const AblationReport report = run_ablation(ds, backbone, lasm, ac);
  const std::string tsv = format_ablation_tsv(report);
  write_file_atomic(a.out, tsv);
  out << tsv;
  for (const AblationRow& r : report.rows) {
    out << "# row " << r.id << ": masked " << r.masked_images << ", land false positives " << r.land_false_positives
        << "\n";
  }
  out << "# lasm off: land false positives " << report.baseline.land_false_positives << "\n";
  return kExitOk;
}

struct InitArgs {
  std::string backbone_out;
  std::string lasm_out;
  bool random = false;
};

int cmd_init_weights(const PipelineConfig& cfg, const InitArgs& a) {
  if (a.backbone_out.empty() && a.lasm_out.empty()) throw ConfigError("nothing to write");
  if (!a.backbone_out.empty()) {
    save_weights(a.random ? init_weights(cfg.seed) : intensity_weights(cfg.seed), a.backbone_out);
  }
  if (!a.lasm_out.empty()) save_lasm_weights(init_lasm_weights(cfg.seed), a.lasm_out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scene-aware SAR ship detection pipeline", "sarship"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config, "key=value configuration file");
  g.seed_opt = app.add_option("--seed", g.seed, "master seed");
  g.lambda_opt = app.add_option("--fixed-lambda", g.fixed_lambda, "use this lambda instead of computing it");
  app.add_flag("--invert-polarity", g.invert_polarity, "map pixels above the Otsu threshold to land");
  app.add_flag("--no-kmeans", g.no_kmeans, "treat every image as inshore");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic dataset directory");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--n", synth.n, "number of images");
  s->add_option("--inshore-fraction", synth.inshore_fraction, "fraction of inshore scenes");
  s->add_option("--width", synth.spec.width);
  s->add_option("--height", synth.spec.height);
  s->add_option("--ships", synth.spec.n_ships, "ships per image");
  s->add_option("--clutter", synth.spec.n_clutter, "land clutter spots per inshore image");
  s->add_option("--looks", synth.spec.speckle_looks, "speckle looks");
  s->add_option("--sea-level", synth.spec.sea_level);
  s->add_option("--land-level", synth.spec.land_level);
  s->add_option("--ship-level", synth.spec.ship_level);

  ClassifyArgs classify;
  auto* c = app.add_subcommand("classify", "label images inshore or offshore");
  c->add_option("--images", classify.images, "image directory")->required();
  c->add_option("--backbone", classify.backbone, "backbone weight file (scene_features=backbone)");
  c->add_option("--out", classify.out, "scenes.tsv to write")->required();

  SegmentArgs segment;
  auto* sg = app.add_subcommand("segment", "Otsu sea-land masks");
  sg->add_option("--images", segment.images, "image directory")->required();
  sg->add_option("--out", segment.out, "mask directory")->required();

  DetectArgs detect_args;
  auto* d = app.add_subcommand("detect", "detect ships");
  d->add_option("--images", detect_args.images, "image directory")->required();
  d->add_option("--scenes", detect_args.scenes, "scenes.tsv")->required();
  d->add_option("--masks", detect_args.masks, "mask directory for inshore images");
  d->add_option("--backbone", detect_args.backbone, "backbone weight file");
  d->add_option("--lasm", detect_args.lasm, "LASM weight file");
  d->add_option("--out", detect_args.out, "detections.jsonl to write")->required();

  EvalArgs eval_args;
  auto* e = app.add_subcommand("eval", "COCO-style detection metrics");
  e->add_option("--detections", eval_args.detections)->required();
  e->add_option("--gt", eval_args.gt, "ground-truth JSONL")->required();
  e->add_option("--out", eval_args.out, "metrics JSON to write")->required();
  e->add_option("--table", eval_args.table, "also write the text table here");

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "K-means gating ablation");
  ab->add_option("--dataset", ablate.dataset, "dataset directory from synth")->required();
  ab->add_option("--backbone", ablate.backbone, "backbone weight file");
  ab->add_option("--lasm", ablate.lasm, "LASM weight file");
  ab->add_option("--out", ablate.out, "TSV to write")->required();

  InitArgs init;
  auto* iw = app.add_subcommand("init-weights", "write seeded weight files");
  iw->add_option("--backbone-out", init.backbone_out);
  iw->add_option("--lasm-out", init.lasm_out);
  iw->add_flag("--random", init.random, "plain random backbone without the intensity channel");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "sarship: " << ex.what() << "\n";
    return kExitConfig;
  }

  try {
    const PipelineConfig cfg = resolve_config(g);
    if (s->parsed()) return cmd_synth(cfg, synth);
    if (c->parsed()) return cmd_classify(cfg, classify);
    if (sg->parsed()) return cmd_segment(cfg, segment);
    if (d->parsed()) return cmd_detect(cfg, detect_args);
    if (e->parsed()) return cmd_eval(eval_args, out);
    if (ab->parsed()) return cmd_ablate(cfg, ablate, out);
    if (iw->parsed()) return cmd_init_weights(cfg, init);
  } catch (const ConfigError& ex) {
    err << "sarship: config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const PlacementError& ex) {
    err << "sarship: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    err << "sarship: " << ex.what() << "\n";
    return kExitInput;
  }
  return kExitConfig;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace sarship::cli
