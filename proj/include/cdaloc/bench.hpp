#pragma once

// Baseline estimators, error statistics and the RS-hypothesis / parameter
// sweep harnesses.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdaloc/cda.hpp"
#include "cdaloc/data.hpp"

namespace cdaloc {

struct ErrorStats {
  double avg = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 for a single error
  std::vector<double> per_mp_errors;
};

/// Euclidean errors per MP with their mean and sample std.
ErrorStats error_stats(std::span<const Point2D> estimates, std::span<const Point2D> truths);

/// Mean and sample std of precomputed errors.
ErrorStats summarize_errors(std::vector<double> errors);

/// One LLS-RS solve over every anchor.
Point2D llsrs_all(const RttSnapshot& snapshot, std::span<const Anchor> anchors);

/// Least median of squares over the PEL set: the PEL whose median squared
/// range residual across all anchors is smallest (ties: lowest index).
Point2D lmes_estimate(const PelSet& pels, const RttSnapshot& snapshot,
                      std::span<const Anchor> anchors);

/// Residual-weighted average with w = 1 / max(re / M, kRwghEpsilon).
inline constexpr double kRwghEpsilon = 1e-6;
Point2D rwgh_estimate(const PelSet& pels);

enum class Method { Llsrs, Cda, Lmes, Rwgh };

std::string_view method_name(Method m);
/// Throws ConfigError for unknown names.
Method parse_method(std::string_view name);

/// Per-MP estimates of one method over one experiment.
std::vector<Point2D> locate_experiment(const Experiment& experiment, Method method,
                                       const FilterConfig& filter);

struct PelErrorSample {
  double rs_seconds = 0.0;
  double error_m = 0.0;
};

/// (RS, position error) for each non-degenerate PEL of the set.
std::vector<PelErrorSample> pel_errors(const PelSet& pels, Point2D truth);

struct BoxStats {
  int bin = 0;  // 1-based after merging
  double rs_lo_ns = 0.0;
  double rs_hi_ns = 0.0;
  std::size_t count = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;  // Tukey: extreme data within 1.5 IQR of the box
  double whisker_hi = 0.0;
  std::size_t outliers = 0;
};

/// Bins samples at the RS quantiles and reports boxplot statistics of the
/// position error in each bin. Empty bins are merged into their successor
/// (or predecessor for the last bin).
std::vector<BoxStats> rs_hypothesis_report(std::span<const PelErrorSample> samples,
                                           int n_bins = 6);

/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

struct SweepRow {
  int m = 0;
  double q = 0.0;
  double avg = 0.0;
  double std = 0.0;
};

/// Full CDA pipeline for each m with q paired through delta^m; errors pooled
/// over every MP of every experiment.
std::vector<SweepRow> param_sweep(std::span<const Experiment> experiments,
                                  std::span<const int> m_values, double delta);

}  // namespace cdaloc
