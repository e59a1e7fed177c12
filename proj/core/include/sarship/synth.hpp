#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sarship/imagery.hpp"

namespace sarship {

// Parameters of one synthetic SAR-like scene. Intensities follow the SAR
// convention: sea is the darkest class, land and targets brighter.
struct SceneSpec {
  int width = 128;
  int height = 128;
  SceneLabel kind = SceneLabel::offshore;
  int n_ships = 3;
  // Bright spots painted on land in inshore scenes; never ships.
  int n_clutter = 4;
  int sea_level = 40;
  int land_level = 150;
  int ship_level = 220;
  int speckle_looks = 4;
  std::uint64_t seed = 0;
};

struct GroundTruthBox {
  Box box;
  // True for land clutter objects, which are not ships.
  bool on_land = false;

  bool operator==(const GroundTruthBox&) const = default;
};

struct Scene {
  GrayImage image;
  SceneLabel kind = SceneLabel::offshore;
  std::vector<GroundTruthBox> boxes;
  SeaLandMask truth_mask;

  // Boxes of real ships only (clutter filtered out).
  std::vector<Box> ship_boxes() const;

  bool operator==(const Scene&) const = default;
};

struct Dataset {
  std::vector<Scene> scenes;

  bool operator==(const Dataset&) const = default;
};

// Throws ConfigError if the levels or extents are inconsistent.
void validate(const SceneSpec& spec);

// Land (inshore only) grown by a random walk from an image edge, ships as
// bright ellipses on sea, clutter spots on land, then unit-mean speckle.
// Throws PlacementError if a ship does not fit after 100 attempts.
Scene generate_scene(const SceneSpec& spec);

// v -> clamp(round(v * g), 0, 255) with g ~ Gamma(looks, 1 / looks).
GrayImage apply_speckle(const GrayImage& img, int looks, std::uint64_t seed);

// round(n * inshore_fraction) inshore scenes at seeded positions; scene i uses seed + i.
Dataset generate_dataset(const SceneSpec& tmpl, int n_images, double inshore_fraction,
                         std::uint64_t seed);

// Directory layout: img_%05d.pgm, mask_%05d.pgm, gt.jsonl, scenes.tsv.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

struct NamedGroundTruth {
  std::string image;
  GroundTruthBox box;
};

// gt.jsonl lines; an integer "image" field is mapped to image_file_name(index).
std::vector<NamedGroundTruth> parse_ground_truth_jsonl(std::string_view text);

std::string image_file_name(std::size_t index);
std::string mask_file_name(std::size_t index);

}  // namespace sarship
