#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cdaloc/cda.hpp"
#include "cdaloc/error.hpp"
#include "cdaloc/sim.hpp"

using namespace cdaloc;

namespace {

RttSnapshot exact_snapshot(std::span<const Anchor> anchors, Point2D truth, double inflate = 0.0) {
  RttSnapshot s;
  s.mp = 1;
  for (const auto& a : anchors) {
    s.entries.push_back({a.id, range_to_rtt(euclidean(a.position, truth) + inflate) * 1e9, true});
  }
  return s;
}

Pel pel_at(int index, Point2D p, double re, double rs) {
  Pel pel;
  pel.combination.index = index;
  pel.combination.anchor_ids = {1, 2, 3};
  pel.position = p;
  pel.re = re;
  pel.rs = rs;
  return pel;
}

PelSet set_of(std::vector<Point2D> pts) {
  PelSet s;
  int i = 1;
  for (const auto& p : pts) s.pels.push_back(pel_at(i++, p, 0.0, 0.0));
  return s;
}

}  // namespace

TEST(Combinations, Counts) {
  EXPECT_EQ(enumerate_combinations(10, 3).size(), 120u);
  EXPECT_EQ(enumerate_combinations(10, 4).size(), 210u);
  const auto one = enumerate_combinations(3, 3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].anchor_ids, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(one[0].index, 1);
}

TEST(Combinations, LexicographicAndDistinct) {
  const auto all = enumerate_combinations(7, 4);
  std::set<std::vector<int>> seen;
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].index, static_cast<int>(i) + 1);
    EXPECT_TRUE(std::is_sorted(all[i].anchor_ids.begin(), all[i].anchor_ids.end()));
    if (i > 0) EXPECT_LT(all[i - 1].anchor_ids, all[i].anchor_ids);
    seen.insert(all[i].anchor_ids);
  }
  EXPECT_EQ(seen.size(), binomial(7, 4));
}

TEST(Combinations, InvalidSizes) {
  EXPECT_THROW(enumerate_combinations(10, 2), ConfigError);
  EXPECT_THROW(enumerate_combinations(4, 5), ConfigError);
}

TEST(Pels, ZeroNoiseExact) {
  const auto anchors = ScenarioConfig::defaults().anchor_list();
  const Point2D truth{12.3, 7.9};
  const auto set = generate_pels(exact_snapshot(anchors, truth), anchors, 3);
  ASSERT_EQ(set.pels.size(), 120u);
  EXPECT_EQ(set.stage, PelStage::All);
  for (const auto& p : set.pels) {
    ASSERT_FALSE(p.degenerate());
    EXPECT_LT(euclidean(*p.position, truth), 1e-6);
    EXPECT_LT(*p.re, 1e-6);
  }
  const auto filtered = tandem_filter(set, FilterConfig{});
  const auto med = median_estimate(filtered);
  EXPECT_LT(euclidean(med, truth), 1e-6);
  const auto r = spatial_variance(filtered);
  EXPECT_DOUBLE_EQ(r(0, 0), kVarianceFloor);
  EXPECT_DOUBLE_EQ(r(1, 1), kVarianceFloor);
}

TEST(Pels, CollinearSubsetIsFlaggedOnly) {
  const std::vector<Anchor> anchors = {
      {1, {0, 0}}, {2, {5, 0}}, {3, {10, 0}}, {4, {3, 8}}, {5, {9, 9}}};
  const auto set = generate_pels(exact_snapshot(anchors, {4, 3}), anchors, 3);
  ASSERT_EQ(set.pels.size(), 10u);
  EXPECT_TRUE(set.pels[0].degenerate());
  EXPECT_FALSE(set.pels[0].re.has_value());
  EXPECT_EQ(set.non_degenerate_count(), 9u);
  for (std::size_t i = 1; i < set.pels.size(); ++i) EXPECT_FALSE(set.pels[i].degenerate());
}

TEST(Metrics, ResidualErrorHandExample) {
  const std::vector<Anchor> anchors = {{1, {3, 4}}, {2, {6, 8}}};
  RttSnapshot snap;
  snap.entries = {{1, range_to_rtt(5.0) * 1e9, true}, {2, range_to_rtt(5.0) * 1e9, true}};
  Pel pel;
  pel.combination = {1, {1, 2}};
  pel.position = Point2D{0, 0};
  EXPECT_NEAR(residual_error(pel, anchors, snap), 5.0, 1e-9);
}

TEST(Metrics, ResidualErrorOfDegeneratePel) {
  const std::vector<Anchor> anchors = {{1, {3, 4}}};
  RttSnapshot snap;
  snap.entries = {{1, 10.0, true}};
  Pel pel;
  pel.combination = {1, {1}};
  EXPECT_THROW(residual_error(pel, anchors, snap), UndefinedMetric);
}

TEST(Metrics, InflationBoundsResidualChange) {
  const auto anchors = ScenarioConfig::defaults().anchor_list();
  const Point2D truth{20, 12};
  const auto base = exact_snapshot(anchors, truth);
  const auto inflated = exact_snapshot(anchors, truth, 1.0);
  Pel pel;
  pel.combination = {1, {2, 5, 9}};
  pel.position = Point2D{18.5, 13.0};
  const double a = residual_error(pel, anchors, base);
  const double b = residual_error(pel, anchors, inflated);
  EXPECT_LE(std::abs(a - b), 3.0 + 1e-9);
}

TEST(Metrics, RttSum) {
  RttSnapshot snap;
  snap.entries = {{1, 10.0, true}, {2, 20.0, true}, {3, 30.0, true}};
  Pel pel;
  pel.combination = {1, {1, 2, 3}};
  EXPECT_NEAR(rtt_sum(pel, snap), 60e-9, 1e-18);
  pel.combination.anchor_ids = {3, 1, 2};
  EXPECT_NEAR(rtt_sum(pel, snap), 60e-9, 1e-18);
  RttSnapshot zeros;
  zeros.entries = {{1, 0.0, true}, {2, 0.0, true}, {3, 0.0, true}};
  EXPECT_EQ(rtt_sum(pel, zeros), 0.0);
}

TEST(Filter, KeepCounts) {
  const FilterConfig cfg;
  const auto k120 = keep_counts(120, cfg);
  EXPECT_EQ(k120.after_re, 38u);
  EXPECT_EQ(k120.after_rs, 12u);
  const auto k100 = keep_counts(100, cfg);
  EXPECT_EQ(k100.after_re, 32u);
  EXPECT_EQ(k100.after_rs, 10u);
  EXPECT_THROW(keep_counts(0, cfg), ConfigError);
}

TEST(Filter, SingleCombinationStillKeepsOne) {
  FilterConfig cfg;
  cfg.m = 10;
  const auto k = keep_counts(1, cfg);
  EXPECT_EQ(k.after_re, 1u);
  EXPECT_EQ(k.after_rs, 1u);
}

TEST(Filter, ConfigValidation) {
  FilterConfig cfg;
  cfg.q = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.q = 0.5;
  cfg.intermediate_fraction = 0.3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.intermediate_fraction = 0.6;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(FilterConfig{}.intermediate(), std::sqrt(0.1), 1e-15);
}

TEST(Filter, RequiresUnfilteredInput) {
  PelSet s = set_of({{0, 0}, {1, 1}, {2, 2}});
  s.stage = PelStage::AfterRE;
  EXPECT_THROW(tandem_filter(s, FilterConfig{}), ConfigError);
}

TEST(Filter, DegeneratePelsDropped) {
  PelSet s;
  for (int i = 1; i <= 20; ++i) {
    Pel p = pel_at(i, {double(i), 0.0}, 0.1 * i, 1e-9 * (21 - i));
    if (i % 4 == 0) {
      p.position.reset();
      p.re.reset();
    }
    s.pels.push_back(p);
  }
  const auto stages = tandem_filter_stages(s, FilterConfig{});
  // L_eff = 15: ceil(15 * 0.316) = 5 after RE, round(1.5) = 2 after RS.
  ASSERT_EQ(stages.after_re.pels.size(), 5u);
  ASSERT_EQ(stages.after_rs.pels.size(), 2u);
  for (const auto& p : stages.after_re.pels) EXPECT_FALSE(p.degenerate());
  EXPECT_EQ(stages.after_rs.stage, PelStage::AfterRERS);
}

TEST(Filter, TiesResolveByIndex) {
  PelSet s;
  for (int i = 1; i <= 10; ++i) s.pels.push_back(pel_at(i, {0, 0}, 1.0, 1.0));
  FilterConfig cfg;
  cfg.q = 0.2;
  const auto out = tandem_filter(s, cfg);
  ASSERT_EQ(out.pels.size(), 2u);
  EXPECT_EQ(out.pels[0].combination.index, 1);
  EXPECT_EQ(out.pels[1].combination.index, 2);
}

TEST(Median, Examples) {
  EXPECT_EQ(median_estimate(set_of({{0, 0}, {2, 2}, {10, 10}})), (Point2D{2, 2}));
  EXPECT_EQ(median_estimate(set_of({{0, 0}, {2, 4}})), (Point2D{1, 2}));
  std::vector<Point2D> pts(11, {5, 5});
  pts.push_back({100, 100});
  EXPECT_EQ(median_estimate(set_of(pts)), (Point2D{5, 5}));
  EXPECT_THROW(median_estimate(PelSet{}), DataError);
}

TEST(Variance, Examples) {
  const auto r = spatial_variance(set_of({{0, 1}, {2, 1}, {4, 1}}));
  EXPECT_NEAR(r(0, 0), 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(r(1, 1), kVarianceFloor);
  EXPECT_EQ(r(0, 1), 0.0);
  const auto same = spatial_variance(set_of({{3, 3}, {3, 3}, {3, 3}}));
  EXPECT_DOUBLE_EQ(same(0, 0), kVarianceFloor);
  EXPECT_THROW(spatial_variance(set_of({{1, 1}})), DataError);
}

TEST(Variance, ScalingLaw) {
  const std::vector<Point2D> pts = {{1, 2}, {3, 7}, {4, 1}, {8, 5}};
  std::vector<Point2D> scaled;
  for (const auto& p : pts) scaled.push_back({4.0 + 2.0 * (p.x - 4.0), 3.75 + 2.0 * (p.y - 3.75)});
  const auto a = spatial_variance(set_of(pts));
  const auto b = spatial_variance(set_of(scaled));
  EXPECT_NEAR(b(0, 0), 4.0 * a(0, 0), 1e-9);
  EXPECT_NEAR(b(1, 1), 4.0 * a(1, 1), 1e-9);
}

TEST(Reliability, PairedQAndExpectation) {
  EXPECT_NEAR(std::pow(0.465, 3), 0.1005, 1e-4);
  EXPECT_DOUBLE_EQ(paired_q(0.465, 3), 0.1);
  EXPECT_DOUBLE_EQ(paired_q(0.465, 4), 0.05);
  EXPECT_DOUBLE_EQ(paired_q(0.465, 5), 0.02);
  EXPECT_DOUBLE_EQ(paired_q(0.465, 6), 0.01);
  EXPECT_NEAR(expected_reliable_pels(10, 3, 0.465), 12.06, 1e-2);
  EXPECT_NEAR(expected_reliable_pels(10, 4, 0.465), 9.82, 1e-2);
  EXPECT_NEAR(expected_reliable_pels(10, 4, 1.0 - 1e-12), 210.0, 1e-6);
  EXPECT_EQ(binomial(10, 3), 120u);
  EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(Locate, DefaultScenarioCounts) {
  const auto cfg = ScenarioConfig::defaults();
  const auto exp = generate_experiment(cfg, 1);
  const auto est = locate_cda(exp.snapshots[0], exp.anchors, FilterConfig{});
  EXPECT_EQ(est.all.pels.size(), 120u);
  EXPECT_EQ(est.after_re.pels.size(), 38u);
  EXPECT_EQ(est.filtered.pels.size(), 12u);
  ASSERT_TRUE(est.covariance.has_value());
  EXPECT_EQ(est.position, median_estimate(est.filtered));
}
