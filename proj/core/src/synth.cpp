#include "sarship/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sarship/errors.hpp"

namespace sarship {

namespace {

constexpr int kPlacementAttempts = 100;
constexpr double kMinLandFraction = 0.2;
constexpr double kMaxLandFraction = 0.5;
// Clearance kept between a ship and land or another object.
constexpr double kShipClearance = 2.0;

std::uint64_t mix_seed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Ellipse {
  double cx, cy, a, b, angle;

  bool contains(double x, double y, double grow = 0.0) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = (dx * c + dy * s) / (a + grow);
    const double v = (-dx * s + dy * c) / (b + grow);
    return u * u + v * v <= 1.0;
  }
};

struct Canvas {
  int width;
  int height;
  std::vector<std::uint8_t> level;     // pre-speckle intensity
  std::vector<std::uint8_t> occupied;  // 1 where an object was painted

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * width + c; }
};

// Pixels of the ellipse grown by `grow`, clipped to the canvas. Returns false
// if any grown pixel falls outside the image.
bool rasterize(const Ellipse& e, double grow, int width, int height, std::vector<std::pair<int, int>>& out) {
  out.clear();
  const double reach = std::max(e.a, e.b) + grow + 1.0;
  const int r0 = static_cast<int>(std::floor(e.cy - reach));
  const int r1 = static_cast<int>(std::ceil(e.cy + reach));
  const int c0 = static_cast<int>(std::floor(e.cx - reach));
  const int c1 = static_cast<int>(std::ceil(e.cx + reach));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!e.contains(c + 0.5, r + 0.5, grow)) continue;
      if (r < 0 || c < 0 || r >= height || c >= width) return false;
      out.emplace_back(r, c);
    }
  }
  return !out.empty();
}

Box bounding_box(const std::vector<std::pair<int, int>>& pixels) {
  int rmin = pixels.front().first, rmax = rmin;
  int cmin = pixels.front().second, cmax = cmin;
  for (auto [r, c] : pixels) {
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  return Box{cmin, rmin, cmax - cmin + 1, rmax - rmin + 1};
}

// Random-walk dilation: a walker starts on a random edge and stamps a disc at
// each step until the target land fraction is reached.
void grow_land(SeaLandMask& mask, std::mt19937_64& rng) {
  const int w = mask.width();
  const int h = mask.height();
  const auto total = static_cast<std::size_t>(w) * h;
  std::uniform_real_distribution<double> frac(kMinLandFraction, kMaxLandFraction);
  const auto target = static_cast<std::size_t>(std::ceil(frac(rng) * static_cast<double>(total)));
  const int radius = std::max(2, std::min(w, h) / 16);
  const int step = std::max(1, radius / 2);

  std::uniform_int_distribution<int> edge_pick(0, 3);
  int r = 0;
  int c = 0;
  switch (edge_pick(rng)) {
    case 0: r = 0; c = std::uniform_int_distribution<int>(0, w - 1)(rng); break;
    case 1: r = h - 1; c = std::uniform_int_distribution<int>(0, w - 1)(rng); break;
    case 2: c = 0; r = std::uniform_int_distribution<int>(0, h - 1)(rng); break;
    default: c = w - 1; r = std::uniform_int_distribution<int>(0, h - 1)(rng); break;
  }

  std::size_t land = 0;
  std::uniform_int_distribution<int> move(-1, 1);
  while (land < target) {
    // Whole discs only: a partially stamped disc can leave a detached sliver.
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        if (dr * dr + dc * dc > radius * radius) continue;
        const int rr = r + dr;
        const int cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        if (mask.at(rr, cc) == SeaLandMask::kSea) {
          mask.set(rr, cc, SeaLandMask::kLand);
          ++land;
        }
      }
    }
    r = std::clamp(r + move(rng) * step, 0, h - 1);
    c = std::clamp(c + move(rng) * step, 0, w - 1);
  }
}

void place_ships(const SceneSpec& spec, const SeaLandMask& mask, Canvas& canvas, std::mt19937_64& rng,
                 std::vector<GroundTruthBox>& boxes) {
  std::uniform_real_distribution<double> major(5.0, 10.0);
  std::uniform_real_distribution<double> minor(3.0, 5.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> ux(0.0, spec.width);
  std::uniform_real_distribution<double> uy(0.0, spec.height);
  std::vector<std::pair<int, int>> halo;
  std::vector<std::pair<int, int>> body;

  for (int ship = 0; ship < spec.n_ships; ++ship) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const Ellipse e{ux(rng), uy(rng), major(rng), minor(rng), angle(rng)};
      if (!rasterize(e, kShipClearance, spec.width, spec.height, halo)) continue;
      const bool clear = std::all_of(halo.begin(), halo.end(), [&](auto rc) {
        return mask.at(rc.first, rc.second) == SeaLandMask::kSea && !canvas.occupied[canvas.index(rc.first, rc.second)];
      });
      if (!clear || !rasterize(e, 0.0, spec.width, spec.height, body)) continue;
      for (auto [r, c] : body) {
        canvas.level[canvas.index(r, c)] = static_cast<std::uint8_t>(spec.ship_level);
        canvas.occupied[canvas.index(r, c)] = 1;
      }
      boxes.push_back({bounding_box(body), false});
      placed = true;
    }
    if (!placed) {
      throw PlacementError("could not place ship " + std::to_string(ship + 1) + " after " +
                           std::to_string(kPlacementAttempts) + " attempts");
    }
  }
}

// Clutter that does not fit is skipped; clutter is scenery, not ground truth.
void place_clutter(const SceneSpec& spec, const SeaLandMask& mask, Canvas& canvas, std::mt19937_64& rng,
                   std::vector<GroundTruthBox>& boxes) {
  std::uniform_real_distribution<double> radius(1.5, 3.5);
  std::uniform_real_distribution<double> ux(0.0, spec.width);
  std::uniform_real_distribution<double> uy(0.0, spec.height);
  std::vector<std::pair<int, int>> halo;
  std::vector<std::pair<int, int>> body;

  for (int spot = 0; spot < spec.n_clutter; ++spot) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const double rad = radius(rng);
      const Ellipse e{ux(rng), uy(rng), rad, rad, 0.0};
      if (!rasterize(e, 1.0, spec.width, spec.height, halo)) continue;
      const bool on_land = std::all_of(halo.begin(), halo.end(), [&](auto rc) {
        return mask.at(rc.first, rc.second) == SeaLandMask::kLand && !canvas.occupied[canvas.index(rc.first, rc.second)];
      });
      if (!on_land || !rasterize(e, 0.0, spec.width, spec.height, body)) continue;
      for (auto [r, c] : body) {
        canvas.level[canvas.index(r, c)] = static_cast<std::uint8_t>(spec.ship_level);
        canvas.occupied[canvas.index(r, c)] = 1;
      }
      boxes.push_back({bounding_box(body), true});
      break;
    }
  }
}

}  // namespace

std::vector<Box> Scene::ship_boxes() const {
  std::vector<Box> out;
  for (const auto& b : boxes) {
    if (!b.on_land) out.push_back(b.box);
  }
  return out;
}

void validate(const SceneSpec& spec) {
  auto in_range = [](int v) { return v >= 0 && v <= 255; };
  if (spec.width < 1 || spec.height < 1) throw ConfigError("scene extents must be positive");
  if (!in_range(spec.sea_level) || !in_range(spec.land_level) || !in_range(spec.ship_level)) {
    throw ConfigError("scene intensity levels must lie in [0, 255]");
  }
  if (!(spec.sea_level < spec.ship_level && spec.sea_level < spec.land_level)) {
    throw ConfigError("sea must be darker than ships and land");
  }
  if (spec.speckle_looks < 1) throw ConfigError("speckle looks must be >= 1");
  if (spec.n_ships < 0 || spec.n_clutter < 0) throw ConfigError("object counts must be non-negative");
}

GrayImage apply_speckle(const GrayImage& img, int looks, std::uint64_t seed) {
  if (looks < 1) throw ConfigError("speckle looks must be >= 1");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(static_cast<double>(looks), 1.0 / looks);
  GrayImage out = img;
  for (auto& v : out.pixels()) {
    const double g = gamma(rng);
    v = static_cast<std::uint8_t>(std::clamp(std::round(v * g), 0.0, 255.0));
  }
  return out;
}

Scene generate_scene(const SceneSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);

  Scene scene;
  scene.kind = spec.kind;
  scene.truth_mask = SeaLandMask(spec.height, spec.width, SeaLandMask::kSea);
  if (spec.kind == SceneLabel::inshore) {
    grow_land(scene.truth_mask, rng);
  }

  Canvas canvas{spec.width, spec.height, {}, std::vector<std::uint8_t>(scene.truth_mask.size(), 0)};
  canvas.level.resize(scene.truth_mask.size());
  for (std::size_t i = 0; i < canvas.level.size(); ++i) {
    canvas.level[i] = static_cast<std::uint8_t>(
        scene.truth_mask.cells()[i] == SeaLandMask::kSea ? spec.sea_level : spec.land_level);
  }

  place_ships(spec, scene.truth_mask, canvas, rng, scene.boxes);
  if (spec.kind == SceneLabel::inshore) {
    place_clutter(spec, scene.truth_mask, canvas, rng, scene.boxes);
  }

  scene.image = apply_speckle(GrayImage(spec.width, spec.height, std::move(canvas.level)), spec.speckle_looks,
                              mix_seed(spec.seed));
  return scene;
}

Dataset generate_dataset(const SceneSpec& tmpl, int n_images, double inshore_fraction, std::uint64_t seed) {
  if (n_images < 1) throw ConfigError("dataset needs at least one image");
  if (!(inshore_fraction >= 0.0 && inshore_fraction <= 1.0)) {
    throw ConfigError("inshore fraction must lie in [0, 1]");
  }
  const auto n_inshore = static_cast<std::size_t>(std::llround(n_images * inshore_fraction));

  std::vector<std::size_t> order(static_cast<std::size_t>(n_images));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<SceneLabel> kinds(order.size(), SceneLabel::offshore);
  for (std::size_t i = 0; i < n_inshore; ++i) kinds[order[i]] = SceneLabel::inshore;

  Dataset ds;
  ds.scenes.reserve(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    SceneSpec spec = tmpl;
    spec.kind = kinds[i];
    spec.seed = seed + i;
    ds.scenes.push_back(generate_scene(spec));
  }
  return ds;
}

}  // namespace sarship
