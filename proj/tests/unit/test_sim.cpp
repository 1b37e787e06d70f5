#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cdaloc/error.hpp"
#include "cdaloc/sim.hpp"

using namespace cdaloc;

TEST(Scenario, DefaultShape) {
  const auto cfg = ScenarioConfig::defaults();
  EXPECT_EQ(cfg.anchors.size(), 10u);
  EXPECT_EQ(cfg.trajectory.size(), 34u);
  EXPECT_EQ(cfg.n_experiments, 12);
  for (const auto& p : cfg.anchors) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 40.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 25.0);
  }
  const auto anchors = cfg.anchor_list();
  for (std::size_t i = 0; i < anchors.size(); ++i) EXPECT_EQ(anchors[i].id, static_cast<int>(i) + 1);
}

TEST(Scenario, NoThreeDefaultAnchorsCollinear) {
  const auto a = ScenarioConfig::defaults().anchors;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      for (std::size_t k = j + 1; k < a.size(); ++k) {
        const double cross = (a[j].x - a[i].x) * (a[k].y - a[i].y) - (a[j].y - a[i].y) * (a[k].x - a[i].x);
        EXPECT_GT(std::abs(cross), 1.0) << i << "," << j << "," << k;
      }
    }
  }
}

TEST(Scenario, Validation) {
  auto cfg = ScenarioConfig::defaults();
  cfg.delta = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScenarioConfig::defaults();
  cfg.anchors.resize(2);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScenarioConfig::defaults();
  cfg.steps_per_segment = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(generate_experiment(ScenarioConfig::defaults(), 0), ConfigError);
}

TEST(Experiment, StructureAndDeterminism) {
  const auto cfg = ScenarioConfig::defaults();
  const auto a = generate_experiment(cfg, 3);
  const auto b = generate_experiment(cfg, 3);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a.index, 3);
  EXPECT_EQ(a.mp_count(), 34u);
  EXPECT_EQ(a.segments.size(), 33u);
  for (const auto& seg : a.segments) EXPECT_EQ(seg.size(), 10u);
  for (std::size_t k = 0; k < a.mp_count(); ++k) {
    EXPECT_EQ(a.snapshots[k].mp, static_cast<int>(k) + 1);
    ASSERT_EQ(a.snapshots[k].entries.size(), b.snapshots[k].entries.size());
    for (std::size_t i = 0; i < a.snapshots[k].entries.size(); ++i) {
      EXPECT_EQ(a.snapshots[k].entries[i].tau_ns, b.snapshots[k].entries[i].tau_ns);
      EXPECT_GE(a.snapshots[k].entries[i].tau_ns, 0.0);
    }
  }
  const auto c = generate_experiment(cfg, 4);
  EXPECT_NE(a.snapshots[0].entries[0].tau_ns, c.snapshots[0].entries[0].tau_ns);
}

TEST(Experiment, SeedChangesData) {
  auto cfg = ScenarioConfig::defaults();
  const auto a = generate_experiment(cfg, 1);
  cfg.seed = 2;
  const auto b = generate_experiment(cfg, 1);
  EXPECT_NE(a.snapshots[0].entries[0].tau_ns, b.snapshots[0].entries[0].tau_ns);
}

TEST(Experiment, ParallelMatchesSequential) {
  const auto cfg = ScenarioConfig::defaults();
  const auto all = generate_experiments(cfg);
  ASSERT_EQ(all.size(), 12u);
  for (int i = 0; i < 12; ++i) {
    const auto one = generate_experiment(cfg, i + 1);
    EXPECT_EQ(all[i].index, i + 1);
    EXPECT_EQ(all[i].snapshots.back().entries.back().tau_ns, one.snapshots.back().entries.back().tau_ns);
  }
}

TEST(Channel, LosErrorsBoundedAndNlosOverestimates) {
  const auto cfg = ScenarioConfig::defaults();
  const auto exps = generate_experiments(cfg);
  for (const auto& e : exps) {
    for (std::size_t k = 0; k < e.mp_count(); ++k) {
      for (const auto& r : e.snapshots[k].entries) {
        const double truth = euclidean(e.anchors[r.anchor_id - 1].position, e.truths[k]);
        const double err = rtt_to_range(r.tau_seconds()) - truth;
        if (r.los) {
          EXPECT_LT(std::abs(err), kCleanErrorBound + 1e-9);
        } else {
          EXPECT_GE(err, -1e-9);
        }
      }
    }
  }
}

TEST(Channel, EmpiricalCleanFractionMatchesDelta) {
  const auto exps = generate_experiments(ScenarioConfig::defaults());
  EXPECT_NEAR(empirical_delta(exps), 0.465, 0.03);
}

TEST(Channel, CleanFractionTracksOtherDeltas) {
  for (double delta : {0.3, 0.7, 0.9}) {
    auto cfg = ScenarioConfig::defaults();
    cfg.delta = delta;
    cfg.seed = 17;
    EXPECT_NEAR(empirical_delta(generate_experiments(cfg)), delta, 0.03) << delta;
  }
}

TEST(Channel, LosProbabilityCalibration) {
  const auto cfg = ScenarioConfig::defaults();
  const double c = nlos_clean_probability(cfg.nlos_bias_mean, cfg.clean_sigma);
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, 0.465);
  EXPECT_NEAR(los_probability(cfg) + (1.0 - los_probability(cfg)) * c, cfg.delta, 1e-9);
  auto full = cfg;
  full.delta = 1.0;
  EXPECT_DOUBLE_EQ(los_probability(full), 1.0);
}

TEST(Imu, NoiselessStepsSumToSegment) {
  auto cfg = ScenarioConfig::defaults();
  cfg.imu_distance_sigma_frac = 0.0;
  cfg.imu_heading_sigma_rad = 0.0;
  const auto e = generate_experiment(cfg, 1);
  for (std::size_t k = 0; k + 1 < e.mp_count(); ++k) {
    double dx = 0.0, dy = 0.0;
    for (const auto& s : e.segments[k]) {
      dx += s.distance * std::cos(s.heading);
      dy += s.distance * std::sin(s.heading);
    }
    EXPECT_NEAR(dx, e.truths[k + 1].x - e.truths[k].x, 1e-9);
    EXPECT_NEAR(dy, e.truths[k + 1].y - e.truths[k].y, 1e-9);
  }
}

TEST(Seeds, DerivedStreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (const char* name : {"sim", "split", "forest", "tree"}) {
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(1, name, i));
  }
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(derive_seed(9, "sim", 3), derive_seed(9, "sim", 3));
  EXPECT_NE(derive_seed(9, "sim", 3), derive_seed(10, "sim", 3));
}
