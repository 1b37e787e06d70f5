#include "cdaloc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cdaloc/error.hpp"
#include "cdaloc/kernels.hpp"
#include "cdaloc/parallel.hpp"

namespace cdaloc {

ErrorStats summarize_errors(std::vector<double> errors) {
  ErrorStats s;
  s.per_mp_errors = std::move(errors);
  const std::size_t n = s.per_mp_errors.size();
  if (n == 0) return s;
  s.avg = std::accumulate(s.per_mp_errors.begin(), s.per_mp_errors.end(), 0.0) / n;
  if (n > 1) {
    double ss = 0.0;
    for (double e : s.per_mp_errors) ss += (e - s.avg) * (e - s.avg);
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

ErrorStats error_stats(std::span<const Point2D> estimates, std::span<const Point2D> truths) {
  if (estimates.size() != truths.size()) {
    throw DataError("error_stats: " + std::to_string(estimates.size()) + " estimates vs " +
                    std::to_string(truths.size()) + " truths");
  }
  std::vector<double> errors(estimates.size());
  for (std::size_t i = 0; i < errors.size(); ++i) errors[i] = euclidean(estimates[i], truths[i]);
  return summarize_errors(std::move(errors));
}

Point2D llsrs_all(const RttSnapshot& snapshot, std::span<const Anchor> anchors) {
  RangeVector ranges;
  ranges.reserve(anchors.size());
  for (const auto& a : anchors) {
    ranges.push_back({a.id, rtt_to_range(snapshot.at(a.id).tau_seconds())});
  }
  return lls_rs_trilaterate(anchors, ranges);
}

Point2D lmes_estimate(const PelSet& pels, const RttSnapshot& snapshot,
                      std::span<const Anchor> anchors) {
  std::vector<const Pel*> valid;
  std::vector<double> xs, ys;
  for (const auto& p : pels.pels) {
    if (p.degenerate()) continue;
    valid.push_back(&p);
    xs.push_back(p.position->x);
    ys.push_back(p.position->y);
  }
  if (valid.empty()) throw DataError("lmes_estimate: no usable PELs");

  const std::size_t n = anchors.size();
  std::vector<std::vector<double>> residual(n, std::vector<double>(valid.size()));
  for (std::size_t a = 0; a < n; ++a) {
    const double range = rtt_to_range(snapshot.at(anchors[a].id).tau_seconds());
    kernels::abs_range_residuals(xs, ys, anchors[a].position, range, residual[a]);
  }

  std::size_t best = 0;
  double best_median = std::numeric_limits<double>::infinity();
  std::vector<double> sq(n);
  for (std::size_t v = 0; v < valid.size(); ++v) {
    for (std::size_t a = 0; a < n; ++a) sq[a] = residual[a][v] * residual[a][v];
    std::sort(sq.begin(), sq.end());
    const double med = n % 2 == 1 ? sq[n / 2] : 0.5 * (sq[n / 2 - 1] + sq[n / 2]);
    if (med < best_median) {
      best_median = med;
      best = v;
    }
  }
  return *valid[best]->position;
}

Point2D rwgh_estimate(const PelSet& pels) {
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (const auto& p : pels.pels) {
    if (p.degenerate()) continue;
    const double m = static_cast<double>(p.combination.anchor_ids.size());
    const double w = 1.0 / std::max(*p.re / m, kRwghEpsilon);
    wx += w * p.position->x;
    wy += w * p.position->y;
    wsum += w;
  }
  if (wsum == 0.0) throw DataError("rwgh_estimate: no usable PELs");
  return {wx / wsum, wy / wsum};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Llsrs: return "llsrs";
    case Method::Cda: return "cda";
    case Method::Lmes: return "lmes";
    case Method::Rwgh: return "rwgh";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Llsrs, Method::Cda, Method::Lmes, Method::Rwgh}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "' (expected llsrs, cda, lmes, rwgh)");
}

std::vector<Point2D> locate_experiment(const Experiment& experiment, Method method,
                                       const FilterConfig& filter) {
  std::vector<Point2D> out;
  out.reserve(experiment.snapshots.size());
  for (const auto& snap : experiment.snapshots) {
    switch (method) {
      case Method::Llsrs:
        out.push_back(llsrs_all(snap, experiment.anchors));
        break;
      case Method::Cda:
        out.push_back(locate_cda(snap, experiment.anchors, filter).position);
        break;
      case Method::Lmes:
        out.push_back(lmes_estimate(generate_pels(snap, experiment.anchors, filter.m), snap,
                                    experiment.anchors));
        break;
      case Method::Rwgh:
        out.push_back(rwgh_estimate(generate_pels(snap, experiment.anchors, filter.m)));
        break;
    }
  }
  return out;
}

std::vector<PelErrorSample> pel_errors(const PelSet& pels, Point2D truth) {
  std::vector<PelErrorSample> out;
  out.reserve(pels.pels.size());
  for (const auto& p : pels.pels) {
    if (p.degenerate()) continue;
    out.push_back({p.rs, euclidean(*p.position, truth)});
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<BoxStats> rs_hypothesis_report(std::span<const PelErrorSample> samples, int n_bins) {
  if (n_bins < 1) throw ConfigError("rs_hypothesis_report: n_bins must be positive");
  if (samples.empty()) throw DataError("rs_hypothesis_report: no samples");

  std::vector<double> rs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) rs[i] = samples[i].rs_seconds;
  std::sort(rs.begin(), rs.end());

  const auto nb = static_cast<std::size_t>(n_bins);
  std::vector<double> edges(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) {
    edges[b] = quantile_sorted(rs, static_cast<double>(b) / static_cast<double>(nb));
  }

  std::vector<std::vector<double>> bins(nb);
  for (const auto& s : samples) {
    // Interior edges split [e_b, e_{b+1}); the maximum lands in the last bin.
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, s.rs_seconds);
    bins[static_cast<std::size_t>(it - (edges.begin() + 1))].push_back(s.error_m);
  }

  struct Range {
    double lo, hi;
    std::vector<double> errors;
  };
  std::vector<Range> merged;
  std::vector<double> carry;
  double carry_lo = edges[0];
  bool carrying = false;
  for (std::size_t b = 0; b < nb; ++b) {
    if (!carrying) carry_lo = edges[b];
    carry.insert(carry.end(), bins[b].begin(), bins[b].end());
    if (carry.empty()) {
      carrying = true;
      continue;
    }
    merged.push_back({carry_lo, edges[b + 1], std::move(carry)});
    carry.clear();
    carrying = false;
  }
  if (carrying && !merged.empty()) merged.back().hi = edges[nb];

  std::vector<BoxStats> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    auto& errs = merged[i].errors;
    std::sort(errs.begin(), errs.end());
    BoxStats box;
    box.bin = static_cast<int>(i + 1);
    box.rs_lo_ns = merged[i].lo * 1e9;
    box.rs_hi_ns = merged[i].hi * 1e9;
    box.count = errs.size();
    box.q1 = quantile_sorted(errs, 0.25);
    box.median = quantile_sorted(errs, 0.5);
    box.q3 = quantile_sorted(errs, 0.75);
    const double iqr = box.q3 - box.q1;
    const double lo_fence = box.q1 - 1.5 * iqr;
    const double hi_fence = box.q3 + 1.5 * iqr;
    box.whisker_lo = box.q1;
    box.whisker_hi = box.q3;
    for (double e : errs) {
      if (e < lo_fence || e > hi_fence) {
        ++box.outliers;
        continue;
      }
      box.whisker_lo = std::min(box.whisker_lo, e);
      box.whisker_hi = std::max(box.whisker_hi, e);
    }
    out.push_back(box);
  }
  return out;
}

std::vector<SweepRow> param_sweep(std::span<const Experiment> experiments,
                                  std::span<const int> m_values, double delta) {
  std::vector<SweepRow> rows;
  for (int m : m_values) {
    const FilterConfig cfg = FilterConfig::paired(m, delta);
    std::vector<std::vector<double>> per_exp(experiments.size());
    parallel_for(experiments.size(), [&](std::size_t e) {
      const auto& exp = experiments[e];
      if (static_cast<int>(exp.anchors.size()) < m) {
        throw ConfigError("param_sweep: m=" + std::to_string(m) + " exceeds anchor count");
      }
      const auto est = locate_experiment(exp, Method::Cda, cfg);
      for (std::size_t k = 0; k < est.size(); ++k) {
        per_exp[e].push_back(euclidean(est[k], exp.truths[k]));
      }
    });
    std::vector<double> pooled;
    for (auto& v : per_exp) pooled.insert(pooled.end(), v.begin(), v.end());
    const ErrorStats stats = summarize_errors(std::move(pooled));
    rows.push_back({m, cfg.q, stats.avg, stats.std});
  }
  return rows;
}

}  // namespace cdaloc
