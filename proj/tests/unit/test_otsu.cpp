#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sarship/errors.hpp"
#include "sarship/otsu.hpp"
#include "test_support.hpp"

namespace sarship {
namespace {

GrayImage half_40_200() {
  GrayImage img(8, 8, 40);
  for (int r = 4; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) img.set(r, c, 200);
  }
  return img;
}

Histogram two_point(int a, int b) {
  Histogram h;
  h.p[a] += 0.5;
  h.p[b] += 0.5;
  return h;
}

TEST(GlobalMean, Examples) {
  Histogram h;
  h.p[100] = 1.0;
  EXPECT_DOUBLE_EQ(global_mean(h), 100.0);
  EXPECT_DOUBLE_EQ(global_mean(two_point(0, 255)), 127.5);
  EXPECT_DOUBLE_EQ(global_mean(two_point(40, 200)), 120.0);
}

TEST(ClassVariance, Examples) {
  EXPECT_NEAR(class_variance(two_point(40, 200), 100), 6400.0, 1e-9);
  const Histogram c = histogram(GrayImage(4, 4, 128));
  for (int k = 0; k < 256; ++k) EXPECT_EQ(class_variance(c, k), 0.0);
  EXPECT_EQ(class_variance(two_point(40, 200), 255), 0.0);
}

TEST(ClassVariance, NonNegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Histogram h = histogram(testing::random_image(16, 16, seed));
    for (int k = 0; k < 256; ++k) EXPECT_GE(class_variance(h, k), 0.0);
  }
}

TEST(OtsuThreshold, HalfAndHalfPicksSmallestMaximizer) {
  const OtsuResult r = otsu_threshold(histogram(half_40_200()));
  EXPECT_EQ(r.threshold, 40);
  EXPECT_FALSE(r.no_separation);
  EXPECT_DOUBLE_EQ(r.global_mean, 120.0);
  for (int k = 40; k < 200; ++k) EXPECT_NEAR(r.variance_curve[k], 6400.0, 1e-9);
  EXPECT_EQ(r.variance_curve[39], 0.0);
}

TEST(OtsuThreshold, ConstantImageHasNoSeparation) {
  const OtsuResult r = otsu_threshold(histogram(GrayImage(8, 8, 128)));
  EXPECT_TRUE(r.no_separation);
  EXPECT_EQ(r.threshold, 0);
}

TEST(OtsuThreshold, BimodalMixture) {
  const OtsuResult r = otsu_threshold(histogram(testing::bimodal_image(256, 256, 17)));
  EXPECT_GE(r.threshold, 100);
  EXPECT_LE(r.threshold, 150);
}

TEST(OtsuThreshold, MatchesTwoClassOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Histogram h = histogram(testing::random_image(64, 64, 1000 + seed));
    const auto oracle = testing::two_class_variance(h);
    const int expected = static_cast<int>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
    const OtsuResult r = otsu_threshold(h);
    EXPECT_EQ(r.threshold, expected);
    for (int k = 0; k < 256; ++k) {
      EXPECT_LE(std::abs(r.variance_curve[k] - oracle[k]), 1e-6 * std::max(std::abs(oracle[k]), 1e-300));
    }
  }
}

TEST(OtsuThreshold, IsArgmaxOfCurve) {
  const OtsuResult r = otsu_threshold(histogram(testing::random_image(20, 20, 5, 30, 90)));
  for (int k = 0; k < 256; ++k) {
    EXPECT_GE(r.variance_curve[r.threshold], r.variance_curve[k]);
    if (k < r.threshold) {
      EXPECT_LT(r.variance_curve[k], r.variance_curve[r.threshold]);
    }
  }
}

TEST(OtsuThreshold, ShiftInvariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GrayImage img = testing::random_image(32, 32, seed, 0, 150);
    const int base = otsu_threshold(histogram(img)).threshold;
    for (int c : {1, 17, 105}) {
      GrayImage shifted = img;
      for (auto& p : shifted.pixels()) p = static_cast<std::uint8_t>(p + c);
      EXPECT_EQ(otsu_threshold(histogram(shifted)).threshold, base + c);
    }
  }
}

TEST(Segment, DefaultPolarityFollowsThreshold) {
  const GrayImage img = half_40_200();
  const SeaLandMask m = segment(img);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(m.at(r, c), img.at(r, c) == 200 ? SeaLandMask::kSea : SeaLandMask::kLand);
  }
}

TEST(Segment, ConstantImageIsAllSea) {
  const SeaLandMask m = segment(GrayImage(5, 5, 77));
  EXPECT_EQ(m.land_count(), 0u);
  EXPECT_EQ(segment(GrayImage(5, 5, 77), {true}).land_count(), 0u);
}

TEST(Segment, InvertedIsComplement) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage img = testing::random_image(16, 12, seed);
    EXPECT_EQ(segment(img, {true}), segment(img).complement());
  }
}

TEST(Segment, BinaryPartitionOfMatchingSize) {
  const GrayImage img = testing::bimodal_image(40, 30, 3);
  const SeaLandMask m = segment(img);
  EXPECT_EQ(m.width(), 40);
  EXPECT_EQ(m.height(), 30);
  std::size_t sea = 0, land = 0;
  for (auto c : m.cells()) {
    ASSERT_TRUE(c == 0 || c == 1);
    (c ? sea : land) += 1;
  }
  EXPECT_EQ(sea + land, img.size());
}

TEST(Segment, EmptyImageThrows) { EXPECT_THROW(segment(GrayImage()), EmptyImageError); }

}  // namespace
}  // namespace sarship
