#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sarship/errors.hpp"
#include "sarship/synth.hpp"

namespace sarship {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string image_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%05zu.pgm", index);
  return buf;
}

std::string mask_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mask_%05zu.pgm", index);
  return buf;
}

std::vector<NamedGroundTruth> parse_ground_truth_jsonl(std::string_view text) {
  std::vector<NamedGroundTruth> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto& image = j.at("image");
      NamedGroundTruth g;
      g.image = image.is_number_unsigned() ? image_file_name(image.get<std::size_t>()) : image.get<std::string>();
      g.box.box = Box{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
      g.box.on_land = j.value("on_land", false);
      if (g.box.box.w < 1 || g.box.box.h < 1) throw FormatError("ground-truth box with empty extent");
      out.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad gt.jsonl line: ") + e.what());
    }
  }
  return out;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir.string());

  std::string gt;
  std::string scenes;
  for (std::size_t i = 0; i < dataset.scenes.size(); ++i) {
    const Scene& s = dataset.scenes[i];
    save_image(s.image, dir / image_file_name(i));
    save_mask(s.truth_mask, dir / mask_file_name(i));
    for (const auto& b : s.boxes) {
      ordered_json line;
      line["image"] = i;
      line["x"] = b.box.x;
      line["y"] = b.box.y;
      line["w"] = b.box.w;
      line["h"] = b.box.h;
      line["on_land"] = b.on_land;
      gt += line.dump() + "\n";
    }
    scenes += std::to_string(i) + "\t" + std::string(to_string(s.kind)) + "\n";
  }
  write_file_atomic(dir / "gt.jsonl", gt);
  write_file_atomic(dir / "scenes.tsv", scenes);
}

Dataset read_dataset(const fs::path& dir) {
  std::ifstream scenes_in(dir / "scenes.tsv");
  if (!scenes_in) throw InputError("missing scenes.tsv in " + dir.string());

  Dataset ds;
  std::string line;
  while (std::getline(scenes_in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("bad scenes.tsv line: " + line);
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw FormatError("bad image index in scenes.tsv: " + line);
    }
    if (index != ds.scenes.size()) throw FormatError("scenes.tsv indices must be consecutive from 0");
    Scene s;
    s.kind = parse_scene_label(line.substr(tab + 1));
    s.image = load_image(dir / image_file_name(index));
    s.truth_mask = load_mask(dir / mask_file_name(index));
    if (s.truth_mask.width() != s.image.width() || s.truth_mask.height() != s.image.height()) {
      throw FormatError("mask and image dimensions differ for image " + std::to_string(index));
    }
    ds.scenes.push_back(std::move(s));
  }

  std::ifstream gt_in(dir / "gt.jsonl", std::ios::binary);
  if (!gt_in) throw InputError("missing gt.jsonl in " + dir.string());
  std::ostringstream gt_text;
  gt_text << gt_in.rdbuf();
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ds.scenes.size(); ++i) index_of[image_file_name(i)] = i;
  for (auto& [name, box] : parse_ground_truth_jsonl(gt_text.str())) {
    const auto it = index_of.find(name);
    if (it == index_of.end()) throw FormatError("gt.jsonl references unknown image " + name);
    ds.scenes[it->second].boxes.push_back(box);
  }
  return ds;
}

}  // namespace sarship
