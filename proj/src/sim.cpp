#include "cdaloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cdaloc/error.hpp"
#include "cdaloc/parallel.hpp"

namespace cdaloc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Point2D> default_loop(int count) {
  // Counter-clockwise rectangle inside the hall, sampled evenly by arc length.
  const Point2D corners[] = {{6.0, 5.0}, {34.0, 5.0}, {34.0, 20.0}, {6.0, 20.0}};
  double perimeter = 0.0;
  for (int i = 0; i < 4; ++i) perimeter += euclidean(corners[i], corners[(i + 1) % 4]);

  std::vector<Point2D> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double s = perimeter * k / count;
    for (int i = 0; i < 4; ++i) {
      const Point2D a = corners[i];
      const Point2D b = corners[(i + 1) % 4];
      const double len = euclidean(a, b);
      if (s <= len) {
        const double t = s / len;
        out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        break;
      }
      s -= len;
    }
  }
  return out;
}

double truncated_normal(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sigma);
  for (;;) {
    const double e = normal(rng);
    if (std::abs(e) < kCleanErrorBound) return e;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : stream) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + index);
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig cfg;
  // Wall-mounted, with uneven insets so no three anchors are collinear.
  cfg.anchors = {
      {5.0, 0.5},   {20.0, 1.2},  {35.0, 0.7},   // south wall
      {39.4, 9.0},  {38.8, 18.0},                // east wall
      {33.0, 24.6}, {21.0, 23.6}, {7.0, 24.3},   // north wall
      {1.0, 17.0},  {0.6, 8.0},                  // west wall
  };
  cfg.trajectory = default_loop(34);
  return cfg;
}

void ScenarioConfig::validate() const {
  if (anchors.size() < 3) throw ConfigError("scenario: need at least 3 anchors");
  if (trajectory.empty()) throw ConfigError("scenario: trajectory is empty");
  if (n_experiments < 1) throw ConfigError("scenario: n_experiments must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("scenario: delta must be in (0, 1]");
  if (!(clean_sigma >= 0.0)) throw ConfigError("scenario: clean_sigma must be >= 0");
  if (!(nlos_bias_mean >= 0.0)) throw ConfigError("scenario: nlos_bias_mean must be >= 0");
  if (!(imu_distance_sigma_frac >= 0.0) || !(imu_heading_sigma_rad >= 0.0)) {
    throw ConfigError("scenario: IMU noise levels must be >= 0");
  }
  if (steps_per_segment < 1) throw ConfigError("scenario: steps_per_segment must be >= 1");
  for (const auto& p : anchors) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("scenario: non-finite anchor");
  }
  for (const auto& p : trajectory) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("scenario: non-finite MP");
  }
}

std::vector<Anchor> ScenarioConfig::anchor_list() const {
  std::vector<Anchor> out;
  out.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out.push_back(Anchor{static_cast<int>(i + 1), anchors[i]});
  }
  return out;
}

double nlos_clean_probability(double nlos_bias_mean, double clean_sigma) {
  if (nlos_bias_mean <= 0.0) return 1.0;
  auto p_bias_below = [&](double u) { return 1.0 - std::exp(-(kCleanErrorBound - u) / nlos_bias_mean); };
  if (clean_sigma <= 0.0) return p_bias_below(0.0);

  // NLoS error = bias + |noise|; integrate over the half-normal noise
  // magnitude truncated to [0, 1) with composite Simpson.
  constexpr int kIntervals = 2000;
  const double h = kCleanErrorBound / kIntervals;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double u = i * h;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = std::exp(-0.5 * (u / clean_sigma) * (u / clean_sigma));
    num += w * density * p_bias_below(u);
    den += w * density;
  }
  return num / den;
}

double los_probability(const ScenarioConfig& cfg) {
  if (cfg.delta >= 1.0) return 1.0;
  const double c = nlos_clean_probability(cfg.nlos_bias_mean, cfg.clean_sigma);
  if (c >= 1.0) return 1.0;
  return std::clamp((cfg.delta - c) / (1.0 - c), 0.0, 1.0);
}

Experiment generate_experiment(const ScenarioConfig& cfg, int experiment_index) {
  cfg.validate();
  if (experiment_index < 1) throw ConfigError("experiment index must be 1-based");

  std::mt19937_64 rng(derive_seed(cfg.seed, "sim", static_cast<std::uint64_t>(experiment_index)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> nlos_bias(
      cfg.nlos_bias_mean > 0.0 ? 1.0 / cfg.nlos_bias_mean : 1.0);
  std::normal_distribution<double> standard(0.0, 1.0);
  const double p_los = los_probability(cfg);

  Experiment exp;
  exp.index = experiment_index;
  exp.anchors = cfg.anchor_list();
  exp.truths = cfg.trajectory;

  int mp = 1;
  for (const Point2D& truth : cfg.trajectory) {
    RttSnapshot snap;
    snap.mp = mp++;
    snap.entries.reserve(exp.anchors.size());
    for (const Anchor& a : exp.anchors) {
      const double range = euclidean(truth, a.position);
      const bool los = uniform(rng) < p_los;
      double err = truncated_normal(rng, cfg.clean_sigma);
      if (!los) {
        const double bias = cfg.nlos_bias_mean > 0.0 ? nlos_bias(rng) : 0.0;
        err = bias + std::abs(err);
      }
      const double tau_s = std::max(0.0, 2.0 * (range + err) / kSpeedOfLight);
      snap.entries.push_back(RttEntry{a.id, tau_s * 1e9, los});
    }
    exp.snapshots.push_back(std::move(snap));
  }

  for (std::size_t k = 0; k + 1 < cfg.trajectory.size(); ++k) {
    const Point2D from = cfg.trajectory[k];
    const Point2D to = cfg.trajectory[k + 1];
    const double step = euclidean(from, to) / cfg.steps_per_segment;
    const double heading = std::atan2(to.y - from.y, to.x - from.x);
    std::vector<StepEvent> steps;
    steps.reserve(static_cast<std::size_t>(cfg.steps_per_segment));
    for (int s = 0; s < cfg.steps_per_segment; ++s) {
      const double d = step * (1.0 + cfg.imu_distance_sigma_frac * standard(rng));
      const double theta = heading + cfg.imu_heading_sigma_rad * standard(rng);
      steps.push_back(StepEvent{std::max(0.0, d), theta});
    }
    exp.segments.push_back(std::move(steps));
  }
  return exp;
}

std::vector<Experiment> generate_experiments(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<Experiment> out(static_cast<std::size_t>(cfg.n_experiments));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = generate_experiment(cfg, static_cast<int>(i + 1));
  });
  return out;
}

double empirical_delta(std::span<const Experiment> experiments) {
  std::size_t total = 0;
  std::size_t clean = 0;
  for (const auto& exp : experiments) {
    for (std::size_t k = 0; k < exp.snapshots.size(); ++k) {
      for (const auto& a : exp.anchors) {
        const double measured = rtt_to_range(exp.snapshots[k].at(a.id).tau_seconds());
        const double err = measured - euclidean(exp.truths[k], a.position);
        ++total;
        if (std::abs(err) < kCleanErrorBound) ++clean;
      }
    }
  }
  if (total == 0) throw DataError("empirical_delta: no measurements");
  return static_cast<double>(clean) / static_cast<double>(total);
}

}  // namespace cdaloc
