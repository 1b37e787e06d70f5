#pragma once

// Combinatorial data augmentation: one preliminary estimated location (PEL)
// per M-subset of anchors, reliability metrics per PEL, and the RE-then-RS
// tandem filter that selects the PELs used for the final estimate.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cdaloc/data.hpp"
#include "cdaloc/geom.hpp"

namespace cdaloc {

/// Lower bound applied to every variance estimate so covariances stay PD [m^2].
inline constexpr double kVarianceFloor = 1e-4;

/// Binomial coefficient C(n, m); 0 when m > n.
std::uint64_t binomial(int n, int m);

struct Combination {
  int index = 0;               // 1-based position in lexicographic order
  std::vector<int> anchor_ids;  // sorted, distinct
};

/// All m-subsets of {1..n} in lexicographic order. Requires 3 <= m <= n.
std::vector<Combination> enumerate_combinations(int n, int m);

struct Pel {
  Combination combination;
  std::optional<Point2D> position;  // empty when the subset is degenerate
  std::optional<double> re;          // residual error [m]; empty when degenerate
  double rs = 0.0;                   // RTT sum [s]

  bool degenerate() const { return !position.has_value(); }
};

enum class PelStage { All, AfterRE, AfterRERS };

struct PelSet {
  std::vector<Pel> pels;
  PelStage stage = PelStage::All;

  std::size_t non_degenerate_count() const;
};

struct FilterConfig {
  int m = 3;
  double q = 0.1;
  /// Fraction kept by the RE stage; sqrt(q) when unset.
  std::optional<double> intermediate_fraction;
  double delta = 0.465;

  double intermediate() const;
  /// Throws ConfigError unless 3 <= m and 0 < q <= intermediate() <= 1.
  void validate() const;

  /// Config with q paired to m through delta^m (see paired_q).
  static FilterConfig paired(int m, double delta);
};

/// delta^m rounded to one significant digit: 0.465 gives 0.1, 0.05, 0.02 and
/// 0.01 for m = 3..6.
double paired_q(double delta, int m);

/// Expected number of PELs built only from clean RTTs: C(n,m) * delta^m.
double expected_reliable_pels(int n, int m, double delta);

/// Runs LLS-RS on every m-subset of `anchors` (combinations enumerated over the
/// anchor list order). Degenerate subsets are kept with an empty position.
/// The snapshot must contain an RTT for every anchor.
PelSet generate_pels(const RttSnapshot& snapshot, std::span<const Anchor> anchors, int m);

/// Sum over the PEL's own anchors of | |z - p_n| - c tau_n / 2 |.
/// Throws UndefinedMetric for a degenerate PEL.
double residual_error(const Pel& pel, std::span<const Anchor> anchors,
                      const RttSnapshot& snapshot);

/// Sum of the PEL's RTTs [s].
double rtt_sum(const Pel& pel, const RttSnapshot& snapshot);

struct KeepCounts {
  std::size_t effective = 0;  // non-degenerate PELs
  std::size_t after_re = 0;
  std::size_t after_rs = 0;
};

/// ceil(L_eff * intermediate) after RE, round(L_eff * q) after RS, the latter
/// raised to 1 when at least one PEL exists. Throws ConfigError when no PEL
/// would survive.
KeepCounts keep_counts(std::size_t effective, const FilterConfig& cfg);

struct FilterStages {
  PelSet after_re;
  PelSet after_rs;
};

/// Drops degenerate PELs, keeps the lowest-RE fraction, then the lowest-RS
/// subset of those. Ties resolve by combination index.
FilterStages tandem_filter_stages(const PelSet& pels, const FilterConfig& cfg);
PelSet tandem_filter(const PelSet& pels, const FilterConfig& cfg);

/// Coordinate-wise median; even counts take the midpoint of the two central
/// order statistics. Degenerate PELs are ignored.
Point2D median_estimate(const PelSet& pels);

/// diag(var x, var y) with the n-1 estimator, each floored at kVarianceFloor.
/// Needs at least two non-degenerate PELs.
Eigen::Matrix2d spatial_variance(const PelSet& pels);

/// Everything the per-MP CDA pipeline produces.
struct CdaEstimate {
  PelSet all;
  PelSet after_re;
  PelSet filtered;
  Point2D position;
  std::optional<Eigen::Matrix2d> covariance;  // absent when fewer than 2 survivors
};

CdaEstimate locate_cda(const RttSnapshot& snapshot, std::span<const Anchor> anchors,
                       const FilterConfig& cfg);

}  // namespace cdaloc
