#include "sarship/scene_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sarship/errors.hpp"

namespace sarship {

namespace {

double squared_distance(std::span<const double> v, std::span<const double> c) {
  double sum = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double d = v[n] - c[n];
    sum += d * d;
  }
  return sum;
}

void check_dimensions(std::span<const FeatureVector> features, std::size_t dim) {
  for (const auto& f : features) {
    if (f.size() != dim) throw DimensionError("feature vectors have mixed dimensions");
    for (double x : f) {
      if (!std::isfinite(x)) throw DimensionError("feature vector has a non-finite value");
    }
  }
}

}  // namespace

FeatureVector scene_feature(const GrayImage& img) {
  if (img.empty()) throw EmptyImageError("scene feature of an empty image");

  FeatureVector f(kSceneFeatureSize, 0.0);
  const auto total = static_cast<double>(img.size());
  double sum = 0.0;
  double bright = 0.0;
  for (auto v : img.pixels()) {
    f[v / 4] += 1.0;
    sum += v;
    if (v > 128) bright += 1.0;
  }
  for (std::size_t b = 0; b < 64; ++b) f[b] /= total;

  const double mean = sum / total;
  double var = 0.0;
  for (auto v : img.pixels()) var += (v - mean) * (v - mean);
  var /= total;

  const int w = img.width();
  const int h = img.height();
  double border = 0.0;
  double border_bright = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (r != 0 && c != 0 && r != h - 1 && c != w - 1) continue;
      border += 1.0;
      if (img.at(r, c) > 128) border_bright += 1.0;
    }
  }

  f[64] = mean / 255.0;
  f[65] = std::sqrt(var) / 255.0;
  f[66] = bright / total;
  f[67] = border_bright / border;
  return f;
}

double distance(std::span<const double> v, std::span<const double> c) {
  if (v.size() != c.size()) throw DimensionError("distance between vectors of different dimension");
  return std::sqrt(squared_distance(v, c));
}

KMeansModel kmeans2_from(std::span<const FeatureVector> features, const FeatureVector& init0,
                         const FeatureVector& init1, int max_iters, double epsilon) {
  if (features.size() < 2) throw DegenerateInputError("k-means needs at least two feature vectors");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  const std::size_t dim = features.front().size();
  check_dimensions(features, dim);
  if (init0.size() != dim || init1.size() != dim) throw DimensionError("initial centroid dimension mismatch");

  KMeansModel model;
  model.centroids = {init0, init1};
  model.assignments.assign(features.size(), 0);

  for (int iter = 1; iter <= max_iters; ++iter) {
    std::array<std::size_t, 2> counts{};
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double d0 = squared_distance(features[i], model.centroids[0]);
      const double d1 = squared_distance(features[i], model.centroids[1]);
      model.assignments[i] = d1 < d0 ? 1 : 0;
      ++counts[model.assignments[i]];
    }

    // Empty cluster: reseed with the item farthest from the surviving centroid.
    for (int k = 0; k < 2; ++k) {
      if (counts[k] != 0) continue;
      const int other = 1 - k;
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < features.size(); ++i) {
        const double d = squared_distance(features[i], model.centroids[other]);
        if (d > best) {
          best = d;
          far = i;
        }
      }
      model.assignments[far] = k;
      --counts[other];
      ++counts[k];
    }

    std::array<FeatureVector, 2> next = {FeatureVector(dim, 0.0), FeatureVector(dim, 0.0)};
    for (std::size_t i = 0; i < features.size(); ++i) {
      auto& acc = next[model.assignments[i]];
      for (std::size_t n = 0; n < dim; ++n) acc[n] += features[i][n];
    }
    for (int k = 0; k < 2; ++k) {
      for (auto& x : next[k]) x /= static_cast<double>(counts[k]);
    }

    const double shift0 = distance(next[0], model.centroids[0]);
    const double shift1 = distance(next[1], model.centroids[1]);
    model.centroids = std::move(next);
    model.iterations_run = iter;

    double inertia = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      inertia += squared_distance(features[i], model.centroids[model.assignments[i]]);
    }
    model.inertia_history.push_back(inertia);

    if (shift0 < epsilon && shift1 < epsilon) {
      model.converged = true;
      break;
    }
  }
  return model;
}

KMeansModel kmeans2(std::span<const FeatureVector> features, const KMeansOptions& options) {
  if (features.size() < 2) throw DegenerateInputError("k-means needs at least two feature vectors");
  check_dimensions(features, features.front().size());

  const std::set<FeatureVector> distinct(features.begin(), features.end());
  if (distinct.size() < 2) throw DegenerateInputError("k-means needs two distinct feature vectors");

  // Uniform sampling without replacement, redrawn until the vectors differ.
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, features.size() - 1);
  const std::size_t first = pick(rng);
  std::uniform_int_distribution<std::size_t> pick_other(0, features.size() - 2);
  std::size_t second = 0;
  do {
    second = pick_other(rng);
    if (second >= first) ++second;
  } while (features[second] == features[first]);

  return kmeans2_from(features, features[first], features[second], options.max_iters, options.epsilon);
}

std::vector<SceneLabel> label_scenes(const KMeansModel& model) {
  const auto ones = static_cast<std::size_t>(std::count(model.assignments.begin(), model.assignments.end(), 1));
  const std::size_t zeros = model.assignments.size() - ones;

  int inshore = 0;
  if (ones < zeros) {
    inshore = 1;
  } else if (ones == zeros) {
    const double b0 = model.centroids[0].empty() ? 0.0 : model.centroids[0].back();
    const double b1 = model.centroids[1].empty() ? 0.0 : model.centroids[1].back();
    inshore = b1 > b0 ? 1 : 0;
  }

  std::vector<SceneLabel> labels(model.assignments.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = model.assignments[i] == inshore ? SceneLabel::inshore : SceneLabel::offshore;
  }
  return labels;
}

FeatureVector pooled_pyramid_feature(std::span<const FeatureMap> pyramid) {
  FeatureVector out;
  for (const auto& level : pyramid) {
    if (level.plane_size() == 0) throw DimensionError("cannot pool an empty feature map");
    for (int c = 0; c < level.channels; ++c) {
      double sum = 0.0;
      for (float v : level.plane(c)) sum += v;
      out.push_back(sum / static_cast<double>(level.plane_size()));
    }
  }
  return out;
}

std::vector<SceneLabel> classify_features(std::span<const FeatureVector> features, const KMeansOptions& options) {
  return label_scenes(kmeans2(features, options));
}

std::vector<SceneLabel> classify_scenes(std::span<const GrayImage> images, const KMeansOptions& options) {
  std::vector<FeatureVector> features;
  features.reserve(images.size());
  for (const auto& img : images) features.push_back(scene_feature(img));
  return classify_features(features, options);
}

std::vector<SceneLabel> classify_scenes(std::span<const GrayImage> images, const BackboneWeights& backbone,
                                        const KMeansOptions& options) {
  std::vector<FeatureVector> features;
  features.reserve(images.size());
  for (const auto& img : images) features.push_back(pooled_pyramid_feature(build_pyramid(img, backbone)));
  return classify_features(features, options);
}

}  // namespace sarship
