#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sarship/errors.hpp"
#include "sarship/scene_cluster.hpp"
#include "sarship/synth.hpp"
#include "test_support.hpp"

namespace sarship {
namespace {

double sq(double x) { return x * x; }

double wcss(std::span<const FeatureVector> f, const std::vector<int>& part) {
  double total = 0;
  for (int k = 0; k < 2; ++k) {
    FeatureVector mean(f[0].size(), 0.0);
    int n = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (part[i] != k) continue;
      ++n;
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += f[i][d];
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    for (auto& m : mean) m /= n;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (part[i] != k) continue;
      for (std::size_t d = 0; d < mean.size(); ++d) total += sq(f[i][d] - mean[d]);
    }
  }
  return total;
}

// Exhaustive search over every 2-partition (item 0 fixed in cluster 0).
std::vector<int> brute_force_partition(std::span<const FeatureVector> f) {
  const std::size_t n = f.size();
  std::vector<int> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::uint32_t bits = 1; bits < (1u << (n - 1)); ++bits) {
    std::vector<int> part(n, 0);
    for (std::size_t i = 1; i < n; ++i) part[i] = (bits >> (i - 1)) & 1u;
    const double c = wcss(f, part);
    if (c < best_cost) {
      best_cost = c;
      best = part;
    }
  }
  return best;
}

// Same partition up to swapping the cluster ids.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  const bool flip = a[0] != b[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != b[i]) != flip) return false;
  }
  return true;
}

TEST(SceneFeature, AllZeroImage) {
  const FeatureVector f = scene_feature(GrayImage(5, 4, 0));
  ASSERT_EQ(f.size(), kSceneFeatureSize);
  EXPECT_EQ(f[0], 1.0);
  for (int b = 1; b < 64; ++b) EXPECT_EQ(f[b], 0.0);
  EXPECT_EQ(f[64], 0.0);
  EXPECT_EQ(f[65], 0.0);
  EXPECT_EQ(f[66], 0.0);
  EXPECT_EQ(f[67], 0.0);
}

TEST(SceneFeature, All255Image) {
  const FeatureVector f = scene_feature(GrayImage(3, 3, 255));
  EXPECT_EQ(f[63], 1.0);
  EXPECT_DOUBLE_EQ(f[64], 1.0);
  EXPECT_NEAR(f[65], 0.0, 1e-12);
  EXPECT_EQ(f[66], 1.0);
  EXPECT_EQ(f[67], 1.0);
}

TEST(SceneFeature, TwoByTwoHandCount) {
  const FeatureVector f = scene_feature(GrayImage(2, 2, std::vector<std::uint8_t>{0, 0, 255, 255}));
  EXPECT_EQ(f[0], 0.5);
  EXPECT_EQ(f[63], 0.5);
  EXPECT_DOUBLE_EQ(f[64], 0.5);
  EXPECT_DOUBLE_EQ(f[65], 0.5);  // population stddev 127.5 / 255
  EXPECT_EQ(f[66], 0.5);
  EXPECT_EQ(f[67], 0.5);         // all four pixels are border pixels
}

TEST(SceneFeature, BorderFractionIgnoresInterior) {
  GrayImage img(5, 5, 0);
  img.set(2, 2, 200);
  const FeatureVector f = scene_feature(img);
  EXPECT_DOUBLE_EQ(f[66], 1.0 / 25.0);
  EXPECT_EQ(f[67], 0.0);
  img.set(0, 0, 200);
  EXPECT_DOUBLE_EQ(scene_feature(img)[67], 1.0 / 16.0);
}

TEST(SceneFeature, EmptyImageThrows) { EXPECT_THROW(scene_feature(GrayImage()), EmptyImageError); }

TEST(Distance, Examples) {
  const FeatureVector a = {1.5, -2.0};
  EXPECT_EQ(distance(a, a), 0.0);
  EXPECT_EQ(distance(FeatureVector{3, 4}, FeatureVector{0, 0}), 5.0);
  EXPECT_NEAR(distance(FeatureVector{1, 1, 1}, FeatureVector{2, 2, 2}), 1.7320508, 1e-7);
  EXPECT_THROW(distance(FeatureVector{1}, FeatureVector{1, 2}), DimensionError);
}

TEST(KMeans, FourPointsMatchBruteForce) {
  const std::vector<FeatureVector> f = {{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  const std::vector<int> oracle = brute_force_partition(f);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KMeansModel m = kmeans2(f, {seed, 100, 1e-6});
    EXPECT_TRUE(m.converged);
    EXPECT_TRUE(same_partition(m.assignments, oracle));
    const int a = m.assignments[0];
    EXPECT_EQ(m.centroids[a], (FeatureVector{0, 0.5}));
    EXPECT_EQ(m.centroids[1 - a], (FeatureVector{10, 10.5}));
  }
}

TEST(KMeans, TwoDistinctVectorsAreTheirOwnCentroids) {
  const std::vector<FeatureVector> f = {{1, 2}, {5, 6}, {1, 2}, {5, 6}};
  const KMeansModel m = kmeans2(f, {7, 100, 1e-6});
  EXPECT_TRUE(m.converged);
  EXPECT_LE(m.iterations_run, 2);
  EXPECT_EQ(m.centroids[m.assignments[0]], f[0]);
  EXPECT_EQ(m.centroids[m.assignments[1]], f[1]);
  EXPECT_NE(m.assignments[0], m.assignments[1]);
}

TEST(KMeans, Deterministic) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<FeatureVector> f(30, FeatureVector(5));
  for (auto& v : f) for (auto& x : v) x = d(rng);
  EXPECT_EQ(kmeans2(f, {3}), kmeans2(f, {3}));
}

TEST(KMeans, DegenerateInput) {
  EXPECT_THROW(kmeans2(std::vector<FeatureVector>{{1, 2}}), DegenerateInputError);
  EXPECT_THROW(kmeans2(std::vector<FeatureVector>{{1, 2}, {1, 2}, {1, 2}}), DegenerateInputError);
  EXPECT_THROW(kmeans2(std::vector<FeatureVector>{{1, 2}, {1}}), DimensionError);
}

TEST(KMeans, LloydInertiaNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<FeatureVector> f(40, FeatureVector(3));
    for (auto& v : f) for (auto& x : v) x = d(rng);
    const KMeansModel m = kmeans2(f, {seed, 100, 1e-9});
    ASSERT_FALSE(m.inertia_history.empty());
    EXPECT_EQ(m.inertia_history.size(), static_cast<std::size_t>(m.iterations_run));
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      EXPECT_LE(m.inertia_history[i], m.inertia_history[i - 1] * (1 + 1e-12)) << seed;
    }
  }
}

TEST(KMeans, SeparableRecoveredFromEveryInitialPair) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    const int n = 6 + static_cast<int>(seed % 7);  // 6..12 items
    std::vector<FeatureVector> f;
    for (int i = 0; i < n; ++i) {
      const double base = (i % 3 == 0) ? 20.0 : 0.0;
      f.push_back({base + jitter(rng), base + jitter(rng), jitter(rng)});
    }
    const auto oracle = brute_force_partition(f);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const KMeansModel m = kmeans2_from(f, f[i], f[j], 100, 1e-9);
        EXPECT_TRUE(same_partition(m.assignments, oracle)) << seed << " " << i << " " << j;
      }
    }
  }
}

TEST(KMeans, PermutationInvariantForFixedInitialVectors) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d;
  std::vector<FeatureVector> f(25, FeatureVector(4));
  for (auto& v : f) for (auto& x : v) x = d(rng);
  const FeatureVector init0 = f[3], init1 = f[17];
  const KMeansModel ref = kmeans2_from(f, init0, init1, 100, 1e-9);

  std::vector<std::size_t> perm(f.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FeatureVector> g;
    for (auto p : perm) g.push_back(f[p]);
    const KMeansModel m = kmeans2_from(g, init0, init1, 100, 1e-9);
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(m.assignments[i], ref.assignments[perm[i]]);
  }
}

TEST(KMeans, EmptyClusterIsReseeded) {
  const std::vector<FeatureVector> f = {{0}, {1}, {2}, {10}};
  const KMeansModel m = kmeans2_from(f, {1}, {1000}, 100, 1e-9);
  const auto ones = std::count(m.assignments.begin(), m.assignments.end(), 1);
  EXPECT_GT(ones, 0);
  EXPECT_LT(ones, 4);
  EXPECT_EQ(m.assignments[3], 1);
}

TEST(KMeans, RejectsBadOptions) {
  const std::vector<FeatureVector> f = {{0}, {1}};
  EXPECT_THROW(kmeans2(f, {0, 0, 1e-6}), ConfigError);
  EXPECT_THROW(kmeans2(f, {0, 10, 0.0}), ConfigError);
}

KMeansModel model_with(std::vector<int> assignments, double border0 = 0.0, double border1 = 0.0) {
  KMeansModel m;
  m.centroids = {FeatureVector{0.0, border0}, FeatureVector{0.0, border1}};
  m.assignments = std::move(assignments);
  return m;
}

TEST(LabelScenes, SmallerClusterIsInshore) {
  using enum SceneLabel;
  EXPECT_EQ(label_scenes(model_with({0, 0, 0, 1})), (std::vector<SceneLabel>{offshore, offshore, offshore, inshore}));
  EXPECT_EQ(label_scenes(model_with({0, 1, 1, 1, 1})),
            (std::vector<SceneLabel>{inshore, offshore, offshore, offshore, offshore}));
}

TEST(LabelScenes, TieBrokenByBorderBrightFraction) {
  using enum SceneLabel;
  EXPECT_EQ(label_scenes(model_with({0, 0, 1, 1}, 0.1, 0.4)), (std::vector<SceneLabel>{offshore, offshore, inshore, inshore}));
  EXPECT_EQ(label_scenes(model_with({0, 0, 1, 1}, 0.4, 0.1)), (std::vector<SceneLabel>{inshore, inshore, offshore, offshore}));
  EXPECT_EQ(label_scenes(model_with({0, 1}, 0.2, 0.2)), (std::vector<SceneLabel>{inshore, offshore}));
}

TEST(LabelScenes, InshoreNeverOutnumbersOffshore) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<int> a(n);
    for (auto& x : a) x = static_cast<int>(rng() % 2);
    const auto labels = label_scenes(model_with(a, 0.5, 0.3));
    const auto inshore = std::count(labels.begin(), labels.end(), SceneLabel::inshore);
    EXPECT_LE(inshore, n - inshore);
  }
}

TEST(ClassifyScenes, RecoversSyntheticLabels) {
  const Dataset ds = generate_dataset(SceneSpec{}, 20, 0.25, 31);
  std::vector<GrayImage> images;
  for (const auto& s : ds.scenes) images.push_back(s.image);
  const auto labels = classify_scenes(images, {0});
  for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(labels[i], ds.scenes[i].kind) << i;
}

TEST(PooledPyramidFeature, ChannelMeansInLevelOrder) {
  std::vector<FeatureMap> pyramid = {FeatureMap(2, 4, 4, 1.5f), FeatureMap(1, 2, 2, 0.0f)};
  pyramid[1].values = {1, 2, 3, 6};
  EXPECT_EQ(pooled_pyramid_feature(pyramid), (FeatureVector{1.5, 1.5, 3.0}));
  const auto levels = build_pyramid(testing::random_image(64, 64, 2), intensity_weights(1));
  EXPECT_EQ(pooled_pyramid_feature(levels).size(), 64u + 128u + 256u);
}

TEST(ClassifyScenes, BackboneFeaturesRecoverSyntheticLabels) {
  const Dataset ds = generate_dataset(SceneSpec{}, 20, 0.25, 31);
  std::vector<GrayImage> images;
  for (const auto& s : ds.scenes) images.push_back(s.image);
  const auto labels = classify_scenes(images, intensity_weights(1), {0});
  for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(labels[i], ds.scenes[i].kind) << i;
}

}  // namespace
}  // namespace sarship
