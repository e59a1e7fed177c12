#pragma once

#include <array>

#include "sarship/imagery.hpp"

namespace sarship {

struct OtsuResult {
  int threshold = 0;
  std::array<double, 256> variance_curve{};
  double global_mean = 0.0;
  // Set when every candidate threshold has zero between-class variance.
  bool no_separation = false;
};

struct SegmentOptions {
  // Default maps pixels <= k* to land; inverted maps them to sea.
  bool invert_polarity = false;
};

// sum_i i * p_i
double global_mean(const Histogram& h);

// (muT * w(k) - mu(k))^2 / (w(k) * (1 - w(k))), with w(k) the cumulative
// probability up to k and mu(k) the cumulative first moment. Zero when
// either side of the split holds no mass.
double class_variance(const Histogram& h, int k);

// Exhaustive scan; the smallest maximizing k wins.
OtsuResult otsu_threshold(const Histogram& h);

// pixel > k* -> sea, pixel <= k* -> land (swapped when inverted).
// no_separation gives an all-sea mask.
SeaLandMask threshold_mask(const GrayImage& img, const OtsuResult& otsu, const SegmentOptions& options = {});

SeaLandMask segment(const GrayImage& img, const SegmentOptions& options = {});

}  // namespace sarship
