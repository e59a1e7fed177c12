#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sarship/backbone.hpp"
#include "sarship/imagery.hpp"

namespace sarship {

using FeatureVector = std::vector<double>;

// Two-cluster Lloyd state. Cluster ids are 0 and 1.
struct KMeansModel {
  std::array<FeatureVector, 2> centroids;
  std::vector<int> assignments;
  int iterations_run = 0;
  bool converged = false;
  // Within-cluster sum of squares after each update step.
  std::vector<double> inertia_history;

  bool operator==(const KMeansModel&) const = default;
};

struct KMeansOptions {
  std::uint64_t seed = 0;
  int max_iters = 100;
  double epsilon = 1e-6;
};

inline constexpr std::size_t kSceneFeatureSize = 68;

// 64-bin normalized histogram (4 gray levels per bin) followed by
// mean/255, stddev/255, fraction of pixels > 128, and fraction of border
// pixels > 128.
FeatureVector scene_feature(const GrayImage& img);

// Euclidean distance. Throws DimensionError on mismatched lengths.
double distance(std::span<const double> v, std::span<const double> c);

// Lloyd iteration with k = 2 from two distinct items sampled with the seed.
// Throws DegenerateInputError with fewer than two distinct vectors.
KMeansModel kmeans2(std::span<const FeatureVector> features, const KMeansOptions& options = {});

// Same iteration from caller-chosen initial centroids.
KMeansModel kmeans2_from(std::span<const FeatureVector> features, const FeatureVector& init0,
                         const FeatureVector& init1, int max_iters, double epsilon);

// The smaller cluster is inshore. On equal sizes the cluster whose centroid
// has the larger last component (border bright fraction) is inshore, cluster
// 0 if that ties too.
std::vector<SceneLabel> label_scenes(const KMeansModel& model);

// Which descriptor feeds the clustering.
enum class SceneFeatureKind { statistics, backbone };

// Global average of every pyramid channel, levels concatenated (448 values
// for the default backbone).
FeatureVector pooled_pyramid_feature(std::span<const FeatureMap> pyramid);

// kmeans2 then label_scenes.
std::vector<SceneLabel> classify_features(std::span<const FeatureVector> features, const KMeansOptions& options = {});

// scene_feature over every image, then kmeans2, then label_scenes.
std::vector<SceneLabel> classify_scenes(std::span<const GrayImage> images, const KMeansOptions& options = {});
// Same with pooled backbone features.
std::vector<SceneLabel> classify_scenes(std::span<const GrayImage> images, const BackboneWeights& backbone,
                                        const KMeansOptions& options = {});

}  // namespace sarship
