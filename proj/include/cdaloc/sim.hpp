#pragma once

// Seeded scenario generator: wall-mounted anchors, a walking loop of
// measurement points, an RTT channel mixing clean and NLoS-biased ranges, and
// noisy IMU steps between measurement points.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cdaloc/data.hpp"
#include "cdaloc/geom.hpp"

namespace cdaloc {

/// Range errors with magnitude below this are "clean" [m].
inline constexpr double kCleanErrorBound = 1.0;

struct ScenarioConfig {
  std::vector<Point2D> anchors;     // ids are assigned 1..N in list order
  std::vector<Point2D> trajectory;  // measurement points in walking order
  int n_experiments = 12;
  double delta = 0.465;             // probability that a range error is clean
  double clean_sigma = 0.3;         // m, truncated at +/- kCleanErrorBound
  double nlos_bias_mean = 5.0;      // m, exponential
  double imu_distance_sigma_frac = 0.05;
  double imu_heading_sigma_rad = 0.05;
  int steps_per_segment = 10;
  std::uint64_t seed = 1;

  /// Ten anchors on the walls of a 40 x 25 m hall and a 34-point loop.
  static ScenarioConfig defaults();

  /// Throws ConfigError on invalid values.
  void validate() const;

  std::vector<Anchor> anchor_list() const;
};

/// Probability of drawing from the line-of-sight branch such that the overall
/// fraction of clean range errors equals cfg.delta. NLoS draws can land within
/// the clean bound too, so this is below delta whenever NLoS bias is enabled.
double los_probability(const ScenarioConfig& cfg);

/// P(|bias + noise| < kCleanErrorBound) for one NLoS draw.
double nlos_clean_probability(double nlos_bias_mean, double clean_sigma);

/// Deterministic in (cfg.seed, experiment_index). experiment_index is 1-based.
Experiment generate_experiment(const ScenarioConfig& cfg, int experiment_index);

/// Experiments 1..cfg.n_experiments, generated in parallel.
std::vector<Experiment> generate_experiments(const ScenarioConfig& cfg);

/// Fraction of anchor-MP range errors (c tau / 2 minus true range) whose
/// magnitude is below kCleanErrorBound.
double empirical_delta(std::span<const Experiment> experiments);

/// Seed for a named random sub-stream ("sim", "split", "forest", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace cdaloc
