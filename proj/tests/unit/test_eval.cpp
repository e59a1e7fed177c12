#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "sarship/errors.hpp"
#include "sarship/eval.hpp"
#include "sarship/scene_cluster.hpp"
#include "test_support.hpp"

namespace sarship {
namespace {

using Dets = std::vector<std::vector<Detection>>;
using Gts = std::vector<std::vector<Box>>;

// Independent COCO-style AP, integer bookkeeping and cell-counted overlaps.
double oracle_ap(const Dets& dets, const Gts& gts, double thr, SizeStratum stratum) {
  auto inter = [](const Box& a, const Box& b) {
    long long n = 0;
    for (int y = a.y; y < a.y + a.h; ++y) {
      for (int x = a.x; x < a.x + a.w; ++x) n += x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
    }
    return n;
  };
  auto overlap = [&](const Box& a, const Box& b) {
    const long long i = inter(a, b);
    return static_cast<double>(i) / static_cast<double>(a.area() + b.area() - i);
  };
  auto counts = [&](const Box& b) {
    const long long a = b.area();
    switch (stratum) {
      case SizeStratum::all: return true;
      case SizeStratum::small: return a < 32 * 32;
      case SizeStratum::medium: return a >= 32 * 32 && a <= 96 * 96;
      case SizeStratum::large: return a > 96 * 96;
    }
    return true;
  };

  struct Item { std::size_t img, idx; double score; };
  std::vector<Item> ranked;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < dets[i].size(); ++j) ranked.push_back({i, j, dets[i][j].score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Item& a, const Item& b) { return a.score > b.score; });

  long long npos = 0;
  for (const auto& g : gts) npos += std::count_if(g.begin(), g.end(), counts);
  std::vector<std::vector<bool>> used(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].size(), false);

  long long tp = 0, fp = 0;
  std::vector<std::pair<long long, long long>> curve;  // (tp, tp + fp)
  for (const Item& it : ranked) {
    const Box& d = dets[it.img][it.idx].box;
    auto pick = [&](bool want_counted) {
      int best = -1;
      double best_o = 0;
      for (std::size_t g = 0; g < gts[it.img].size(); ++g) {
        if (used[it.img][g] || counts(gts[it.img][g]) != want_counted) continue;
        const double o = overlap(d, gts[it.img][g]);
        if (o >= thr && o > best_o) {
          best = static_cast<int>(g);
          best_o = o;
        }
      }
      return best;
    };
    int g = pick(true);
    if (g >= 0) {
      used[it.img][g] = true;
      ++tp;
    } else if ((g = pick(false)) >= 0) {
      used[it.img][g] = true;
      continue;
    } else if (!counts(d)) {
      continue;
    } else {
      ++fp;
    }
    curve.push_back({tp, tp + fp});
  }
  if (npos == 0) return fp == 0 ? 1.0 : 0.0;
  double sum = 0;
  for (int k = 0; k <= 100; ++k) {
    double best = 0;
    for (auto [t, n] : curve) {
      if (t * 100 >= k * npos) best = std::max(best, static_cast<double>(t) / static_cast<double>(n));
    }
    sum += best;
  }
  return sum / 101.0;
}

TEST(AveragePrecision, SinglePerfectDetection) {
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  EXPECT_EQ(average_precision({Detection{{0, 0, 10, 9}, 0.3}}, gt, 0.5), 1.0);
}

TEST(AveragePrecision, FalsePositiveAfterRecallOne) {
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  const std::vector<Detection> dets = {{{0, 0, 10, 7}, 0.9}, {{50, 50, 5, 5}, 0.8}};
  EXPECT_NEAR(iou(dets[0].box, gt[0]), 0.7, 1e-12);
  EXPECT_NEAR(average_precision(dets, gt, 0.5), 1.0, 1e-6);
}

TEST(AveragePrecision, HalfRecallCap) {
  const std::vector<Box> gt = {{0, 0, 10, 10}, {40, 40, 10, 10}};
  EXPECT_NEAR(average_precision({Detection{{0, 0, 10, 10}, 0.9}}, gt, 0.5), 51.0 / 101.0, 1e-6);
  EXPECT_NEAR(51.0 / 101.0, 0.50495, 1e-5);
}

TEST(AveragePrecision, EmptyGroundTruthConvention) {
  EXPECT_EQ(average_precision(std::vector<Detection>{}, std::vector<Box>{}, 0.5), 1.0);
  EXPECT_EQ(average_precision({Detection{{0, 0, 3, 3}, 0.5}}, std::vector<Box>{}, 0.5), 0.0);
}

TEST(AveragePrecision, MonotoneScoreTransformInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pos(0, 30), ext(4, 12);
  std::uniform_real_distribution<double> s(0.01, 0.99);
  for (int trial = 0; trial < 40; ++trial) {
    Dets d(3);
    Gts g(3);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 4; ++k) g[i].push_back({pos(rng), pos(rng), ext(rng), ext(rng)});
      for (int k = 0; k < 5; ++k) d[i].push_back({{pos(rng), pos(rng), ext(rng), ext(rng)}, s(rng)});
    }
    Dets t = d;
    for (auto& v : t) {
      for (auto& x : v) x.score = std::exp(3.0 * x.score) / 100.0;
    }
    for (double thr : coco_iou_thresholds()) {
      EXPECT_EQ(average_precision(d, g, thr), average_precision(t, g, thr));
    }
  }
}

TEST(AveragePrecision, AddingTopTruePositiveNeverHurts) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pos(0, 40), ext(4, 12);
  std::uniform_real_distribution<double> s(0.0, 0.9);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Box> g;
    std::vector<Detection> d;
    for (int k = 0; k < 5; ++k) g.push_back({pos(rng), pos(rng), ext(rng), ext(rng)});
    for (int k = 0; k < 6; ++k) d.push_back({{pos(rng), pos(rng), ext(rng), ext(rng)}, s(rng)});
    const double before = average_precision(d, g, 0.5);
    const auto matched = match_detections(d, g, 0.5);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::find(matched.begin(), matched.end(), static_cast<int>(k)) != matched.end()) continue;
      auto more = d;
      more.push_back({g[k], 0.95});
      EXPECT_GE(average_precision(more, g, 0.5), before - 1e-12);
      break;
    }
  }
}

TEST(MatchDetections, GreedyByScore) {
  const std::vector<Box> g = {{0, 0, 10, 10}};
  const std::vector<Detection> d = {{{0, 0, 10, 8}, 0.4}, {{0, 0, 10, 10}, 0.9}};
  EXPECT_EQ(match_detections(d, g, 0.5), (std::vector<int>{-1, 0}));
}

TEST(CocoMap, PerfectDetections) {
  const Gts g = {{{0, 0, 10, 10}, {20, 20, 40, 40}}, {{5, 5, 100, 100}}};
  Dets d(2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const auto& b : g[i]) d[i].push_back({b, 1.0});
  }
  const MetricsReport r = coco_map(d, g);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.map50, 1.0);
  EXPECT_EQ(r.map75, 1.0);
  EXPECT_EQ(r.map_s, 1.0);
  EXPECT_EQ(r.map_m, 1.0);
  EXPECT_EQ(r.map_l, 1.0);
  EXPECT_EQ(r.ground_truths_by_size, (std::array<std::size_t, 3>{1, 1, 1}));
}

TEST(CocoMap, NoDetections) {
  const Gts g = {{{0, 0, 10, 10}, {20, 20, 40, 40}, {0, 0, 100, 100}}};
  const MetricsReport r = coco_map(Dets(1), g);
  EXPECT_EQ(r.map, 0.0);
  EXPECT_EQ(r.map50, 0.0);
  EXPECT_EQ(r.map75, 0.0);
  EXPECT_EQ(r.map_s, 0.0);
  EXPECT_EQ(r.map_m, 0.0);
  EXPECT_EQ(r.map_l, 0.0);
}

TEST(CocoMap, MapIsMeanOfThresholds) {
  const Gts g = {{{0, 0, 10, 10}, {30, 30, 12, 12}}};
  const Dets d = {{{{0, 0, 10, 8}, 0.9}, {{31, 30, 12, 12}, 0.8}, {{60, 60, 5, 5}, 0.7}}};
  const MetricsReport r = coco_map(d, g);
  const double mean = std::accumulate(r.per_threshold.begin(), r.per_threshold.end(), 0.0) / 10.0;
  EXPECT_NEAR(r.map, mean, 1e-9);
  EXPECT_EQ(r.map50, r.per_threshold[0]);
  EXPECT_EQ(r.map75, r.per_threshold[5]);
  for (double v : {r.map, r.map50, r.map75, r.map_s, r.map_m, r.map_l}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(CocoMap, MatchesOracleOnSmallInstances) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> count(0, 5), images(1, 3), pos(0, 60);
  std::uniform_int_distribution<int> ext(2, 60);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  const SizeStratum strata[] = {SizeStratum::small, SizeStratum::medium, SizeStratum::large};
  for (int trial = 0; trial < 300; ++trial) {
    const int n = images(rng);
    Dets d(n);
    Gts g(n);
    for (int i = 0; i < n; ++i) {
      const int ng = count(rng), nd = count(rng);
      for (int k = 0; k < ng; ++k) {
        const Box b{pos(rng), pos(rng), ext(rng) * (1 + trial % 3), ext(rng) * (1 + trial % 2)};
        g[i].push_back(b);
        // Jittered copies make true matches likely.
        if (k < nd) d[i].push_back({{b.x + k % 3, b.y, b.w, b.h + k % 2}, s(rng)});
      }
      for (int k = ng; k < nd; ++k) d[i].push_back({{pos(rng), pos(rng), ext(rng), ext(rng)}, s(rng)});
    }
    const MetricsReport r = coco_map(d, g);
    const auto thr = coco_iou_thresholds();
    for (int t = 0; t < 10; ++t) EXPECT_NEAR(r.per_threshold[t], oracle_ap(d, g, thr[t], SizeStratum::all), 1e-12);
    double stratum_sums[3] = {0, 0, 0};
    for (int t = 0; t < 10; ++t) {
      for (int k = 0; k < 3; ++k) stratum_sums[k] += oracle_ap(d, g, thr[t], strata[k]);
    }
    EXPECT_NEAR(r.map_s, stratum_sums[0] / 10, 1e-12);
    EXPECT_NEAR(r.map_m, stratum_sums[1] / 10, 1e-12);
    EXPECT_NEAR(r.map_l, stratum_sums[2] / 10, 1e-12);
  }
}

TEST(CocoMap, IouThresholds) {
  const auto t = coco_iou_thresholds();
  EXPECT_NEAR(t[0], 0.5, 1e-12);
  EXPECT_NEAR(t[9], 0.95, 1e-12);
  EXPECT_TRUE(in_stratum(32 * 32 - 1, SizeStratum::small));
  EXPECT_TRUE(in_stratum(32 * 32, SizeStratum::medium));
  EXPECT_TRUE(in_stratum(96 * 96, SizeStratum::medium));
  EXPECT_TRUE(in_stratum(96 * 96 + 1, SizeStratum::large));
}

TEST(MetricsFormat, JsonAndTable) {
  MetricsReport r;
  r.map = 0.5;
  r.map50 = 0.75;
  const std::string json = format_metrics_json(r);
  EXPECT_NE(json.find("\"map\": 0.5"), std::string::npos);
  EXPECT_NE(json.find("\"map50\": 0.75"), std::string::npos);
  EXPECT_NE(format_metrics_table(r).find("mAP50"), std::string::npos);
}

TEST(JoinByImage, DropsClutterAndAligns) {
  const std::vector<NamedDetection> d = {{"b", {{0, 0, 2, 2}, 0.5}}};
  const std::vector<NamedGroundTruth> g = {{"a", {{0, 0, 4, 4}, false}}, {"a", {{5, 5, 4, 4}, true}}};
  const EvalSet set = join_by_image(d, g);
  EXPECT_EQ(set.images, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(set.ground_truth[0].size(), 1u);
  EXPECT_TRUE(set.ground_truth[1].empty());
  EXPECT_EQ(set.detections[1].size(), 1u);
}

AblationConfig ablation_config() {
  AblationConfig cfg;
  cfg.lasm.fixed_lambda = 0.3;
  cfg.segment.invert_polarity = true;
  return cfg;
}

TEST(Ablation, ZeroLambdaMatchesBaseline) {
  // With lambda fixed at zero the attention map is all ones, so masking is inert.
  const Dataset ds = generate_dataset(SceneSpec{}, 6, 0.5, 2);
  AblationConfig cfg = ablation_config();
  cfg.lasm.fixed_lambda = 0.0;
  const auto r = run_ablation(ds, intensity_weights(1), zero_lasm_weights(), cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].id, 1);
  EXPECT_TRUE(r.rows[0].kmeans_gating);
  EXPECT_FALSE(r.rows[1].kmeans_gating);
  EXPECT_EQ(r.rows[1].masked_images, 6u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.metrics.map, r.baseline.metrics.map);
    EXPECT_EQ(row.metrics.per_threshold, r.baseline.metrics.per_threshold);
    EXPECT_EQ(row.land_false_positives, r.baseline.land_false_positives);
  }
}

TEST(Ablation, GatedMaskCountFollowsClassifier) {
  const Dataset ds = generate_dataset(SceneSpec{}, 10, 0.3, 4);
  const AblationConfig cfg = ablation_config();
  std::vector<GrayImage> images;
  for (const auto& s : ds.scenes) images.push_back(s.image);
  const auto labels = classify_scenes(images, cfg.kmeans);
  const auto r = run_ablation(ds, intensity_weights(1), zero_lasm_weights(), cfg);
  EXPECT_EQ(r.rows[0].masked_images,
            static_cast<std::size_t>(std::count(labels.begin(), labels.end(), SceneLabel::inshore)));
}

TEST(Ablation, TsvHasTwoRows) {
  const Dataset ds = generate_dataset(SceneSpec{}, 8, 0.25, 5);
  const auto r = run_ablation(ds, intensity_weights(1), zero_lasm_weights(), ablation_config());
  const std::string tsv = format_ablation_tsv(r);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 3);
  EXPECT_EQ(tsv.rfind("id\tkmeans\tmap\tmap50\n", 0), 0u);
  EXPECT_NE(tsv.find("\n1\tyes\t"), std::string::npos);
  EXPECT_NE(tsv.find("\n2\tno\t"), std::string::npos);
}

}  // namespace
}  // namespace sarship
