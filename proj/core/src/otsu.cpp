#include "sarship/otsu.hpp"

#include "sarship/errors.hpp"

namespace sarship {

namespace {

// Both masses come from independent sums so that an empty side is exactly 0
// rather than a rounding residue of 1 - w.
double variance_from_moments(double mean_total, double below_mass, double above_mass, double below_moment) {
  if (below_mass == 0.0 || above_mass == 0.0) return 0.0;
  const double num = mean_total * below_mass - below_moment;
  return num * num / (below_mass * above_mass);
}

}  // namespace

double global_mean(const Histogram& h) {
  double mu = 0.0;
  for (int i = 0; i < 256; ++i) mu += i * h.p[i];
  return mu;
}

double class_variance(const Histogram& h, int k) {
  if (k < 0 || k > 255) throw DimensionError("threshold must lie in [0, 255]");
  double below = 0.0;
  double moment = 0.0;
  for (int i = 0; i <= k; ++i) {
    below += h.p[i];
    moment += i * h.p[i];
  }
  double above = 0.0;
  for (int i = k + 1; i < 256; ++i) above += h.p[i];
  return variance_from_moments(global_mean(h), below, above, moment);
}

OtsuResult otsu_threshold(const Histogram& h) {
  OtsuResult result;
  result.global_mean = global_mean(h);

  std::array<double, 257> suffix{};
  for (int i = 255; i >= 0; --i) suffix[i] = suffix[i + 1] + h.p[i];

  double below = 0.0;
  double moment = 0.0;
  double best = 0.0;
  for (int k = 0; k < 256; ++k) {
    below += h.p[k];
    moment += k * h.p[k];
    const double s2 = variance_from_moments(result.global_mean, below, suffix[k + 1], moment);
    result.variance_curve[k] = s2;
    if (s2 > best) {
      best = s2;
      result.threshold = k;
    }
  }
  result.no_separation = best == 0.0;
  return result;
}

SeaLandMask threshold_mask(const GrayImage& img, const OtsuResult& otsu, const SegmentOptions& options) {
  if (img.empty()) throw EmptyImageError("segmenting an empty image");
  if (otsu.no_separation) return SeaLandMask(img.height(), img.width(), SeaLandMask::kSea);

  const std::uint8_t above = options.invert_polarity ? SeaLandMask::kLand : SeaLandMask::kSea;
  const std::uint8_t at_or_below = options.invert_polarity ? SeaLandMask::kSea : SeaLandMask::kLand;
  std::vector<std::uint8_t> cells(img.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i] = img.pixels()[i] > otsu.threshold ? above : at_or_below;
  }
  return SeaLandMask(img.height(), img.width(), std::move(cells));
}

SeaLandMask segment(const GrayImage& img, const SegmentOptions& options) {
  return threshold_mask(img, otsu_threshold(histogram(img)), options);
}

}  // namespace sarship
