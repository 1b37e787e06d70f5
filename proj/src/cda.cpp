#include "cdaloc/cda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdaloc/error.hpp"
#include "cdaloc/kernels.hpp"

namespace cdaloc {

std::uint64_t binomial(int n, int m) {
  if (m < 0 || n < 0 || m > n) return 0;
  m = std::min(m, n - m);
  std::uint64_t result = 1;
  for (int i = 1; i <= m; ++i) {
    result = result * static_cast<std::uint64_t>(n - m + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

std::vector<Combination> enumerate_combinations(int n, int m) {
  if (m < 3 || m > n) {
    throw ConfigError("enumerate_combinations: need 3 <= m <= n, got n=" + std::to_string(n) +
                      " m=" + std::to_string(m));
  }
  std::vector<Combination> out;
  out.reserve(binomial(n, m));

  std::vector<int> ids(static_cast<std::size_t>(m));
  std::iota(ids.begin(), ids.end(), 1);
  int index = 1;
  for (;;) {
    out.push_back(Combination{index++, ids});
    // Advance to the next subset in lexicographic order.
    int k = m - 1;
    while (k >= 0 && ids[static_cast<std::size_t>(k)] == n - m + k + 1) --k;
    if (k < 0) break;
    ++ids[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < m; ++j) {
      ids[static_cast<std::size_t>(j)] = ids[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

std::size_t PelSet::non_degenerate_count() const {
  return static_cast<std::size_t>(
      std::count_if(pels.begin(), pels.end(), [](const Pel& p) { return !p.degenerate(); }));
}

double FilterConfig::intermediate() const {
  return intermediate_fraction ? *intermediate_fraction : std::sqrt(q);
}

void FilterConfig::validate() const {
  if (m < 3) throw ConfigError("filter: m must be at least 3");
  const double mid = intermediate();
  if (!(q > 0.0 && q <= mid && mid <= 1.0)) {
    throw ConfigError("filter: need 0 < q <= intermediate fraction <= 1 (q=" +
                      std::to_string(q) + ", intermediate=" + std::to_string(mid) + ")");
  }
}

FilterConfig FilterConfig::paired(int m, double delta) {
  FilterConfig cfg;
  cfg.m = m;
  cfg.q = paired_q(delta, m);
  cfg.delta = delta;
  return cfg;
}

double paired_q(double delta, int m) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("paired_q: delta must be in (0, 1]");
  const double raw = std::pow(delta, m);
  const double scale = std::pow(10.0, std::floor(std::log10(raw)));
  return std::round(raw / scale) * scale;
}

double expected_reliable_pels(int n, int m, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("expected_reliable_pels: delta must be in (0, 1]");
  }
  return static_cast<double>(binomial(n, m)) * std::pow(delta, m);
}

namespace {

std::vector<std::size_t> anchor_slots(std::span<const Anchor> anchors, const Combination& c) {
  std::vector<std::size_t> slots;
  slots.reserve(c.anchor_ids.size());
  for (int id : c.anchor_ids) {
    auto it = std::find_if(anchors.begin(), anchors.end(), [id](const Anchor& a) { return a.id == id; });
    if (it == anchors.end()) throw DataError("unknown anchor id " + std::to_string(id));
    slots.push_back(static_cast<std::size_t>(it - anchors.begin()));
  }
  return slots;
}

}  // namespace

PelSet generate_pels(const RttSnapshot& snapshot, std::span<const Anchor> anchors, int m) {
  const int n = static_cast<int>(anchors.size());
  const auto combos = enumerate_combinations(n, m);

  std::vector<double> ranges(anchors.size());
  std::vector<double> taus(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& e = snapshot.at(anchors[i].id);
    taus[i] = e.tau_seconds();
    ranges[i] = rtt_to_range(taus[i]);
  }

  PelSet set;
  set.stage = PelStage::All;
  set.pels.reserve(combos.size());

  std::vector<Anchor> subset(static_cast<std::size_t>(m));
  RangeVector sub_ranges(static_cast<std::size_t>(m));
  // Combination ids are positions (1-based) in the anchor list.
  for (const auto& c : combos) {
    Pel pel;
    pel.combination.index = c.index;
    pel.combination.anchor_ids.reserve(c.anchor_ids.size());
    for (std::size_t k = 0; k < c.anchor_ids.size(); ++k) {
      const auto slot = static_cast<std::size_t>(c.anchor_ids[k] - 1);
      subset[k] = anchors[slot];
      sub_ranges[k] = RangeEntry{anchors[slot].id, ranges[slot]};
      pel.combination.anchor_ids.push_back(anchors[slot].id);
      pel.rs += taus[slot];
    }
    try {
      pel.position = lls_rs_trilaterate(subset, sub_ranges);
    } catch (const DegenerateGeometry&) {
      pel.position.reset();
    }
    set.pels.push_back(std::move(pel));
  }

  // Residual matrix: one SIMD pass per anchor over all PEL positions.
  std::vector<std::size_t> valid;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < set.pels.size(); ++i) {
    if (set.pels[i].degenerate()) continue;
    valid.push_back(i);
    xs.push_back(set.pels[i].position->x);
    ys.push_back(set.pels[i].position->y);
  }
  std::vector<std::vector<double>> residual(anchors.size(), std::vector<double>(valid.size()));
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    kernels::abs_range_residuals(xs, ys, anchors[a].position, ranges[a], residual[a]);
  }
  for (std::size_t v = 0; v < valid.size(); ++v) {
    Pel& pel = set.pels[valid[v]];
    const auto& ids = combos[static_cast<std::size_t>(pel.combination.index - 1)].anchor_ids;
    double re = 0.0;
    for (int id : ids) re += residual[static_cast<std::size_t>(id - 1)][v];
    pel.re = re;
  }
  return set;
}

double residual_error(const Pel& pel, std::span<const Anchor> anchors,
                      const RttSnapshot& snapshot) {
  if (pel.degenerate()) {
    throw UndefinedMetric("residual error undefined for degenerate PEL " +
                          std::to_string(pel.combination.index));
  }
  double re = 0.0;
  for (std::size_t slot : anchor_slots(anchors, pel.combination)) {
    const Anchor& a = anchors[slot];
    const double dx = pel.position->x - a.position.x;
    const double dy = pel.position->y - a.position.y;
    const double range = rtt_to_range(snapshot.at(a.id).tau_seconds());
    re += std::abs(std::sqrt(dx * dx + dy * dy) - range);
  }
  return re;
}

double rtt_sum(const Pel& pel, const RttSnapshot& snapshot) {
  double sum = 0.0;
  for (int id : pel.combination.anchor_ids) sum += snapshot.at(id).tau_seconds();
  return sum;
}

KeepCounts keep_counts(std::size_t effective, const FilterConfig& cfg) {
  cfg.validate();
  // Guard against products such as 100 * 0.5 landing a hair above an integer.
  constexpr double kSlack = 1e-9;
  const double l = static_cast<double>(effective);
  KeepCounts k;
  k.effective = effective;
  k.after_re = static_cast<std::size_t>(std::ceil(l * cfg.intermediate() - kSlack));
  k.after_rs = static_cast<std::size_t>(std::round(l * cfg.q + kSlack));
  if (effective > 0) {
    k.after_re = std::clamp<std::size_t>(k.after_re, 1, effective);
    k.after_rs = std::clamp<std::size_t>(k.after_rs, 1, k.after_re);
  }
  if (k.after_rs < 1) {
    throw ConfigError("tandem filter: no PEL would survive (" + std::to_string(effective) +
                      " non-degenerate)");
  }
  return k;
}

FilterStages tandem_filter_stages(const PelSet& pels, const FilterConfig& cfg) {
  if (pels.stage != PelStage::All) {
    throw ConfigError("tandem filter expects the full PEL set");
  }
  std::vector<Pel> pool;
  pool.reserve(pels.pels.size());
  for (const auto& p : pels.pels) {
    if (!p.degenerate()) pool.push_back(p);
  }
  const KeepCounts k = keep_counts(pool.size(), cfg);

  std::sort(pool.begin(), pool.end(), [](const Pel& a, const Pel& b) {
    if (*a.re != *b.re) return *a.re < *b.re;
    return a.combination.index < b.combination.index;
  });
  pool.resize(k.after_re);

  FilterStages out;
  out.after_re.stage = PelStage::AfterRE;
  out.after_re.pels = pool;

  std::sort(pool.begin(), pool.end(), [](const Pel& a, const Pel& b) {
    if (a.rs != b.rs) return a.rs < b.rs;
    return a.combination.index < b.combination.index;
  });
  pool.resize(k.after_rs);
  out.after_rs.stage = PelStage::AfterRERS;
  out.after_rs.pels = std::move(pool);
  return out;
}

PelSet tandem_filter(const PelSet& pels, const FilterConfig& cfg) {
  return tandem_filter_stages(pels, cfg).after_rs;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

void split_coordinates(const PelSet& pels, std::vector<double>& xs, std::vector<double>& ys) {
  for (const auto& p : pels.pels) {
    if (p.degenerate()) continue;
    xs.push_back(p.position->x);
    ys.push_back(p.position->y);
  }
}

}  // namespace

Point2D median_estimate(const PelSet& pels) {
  std::vector<double> xs, ys;
  split_coordinates(pels, xs, ys);
  if (xs.empty()) throw DataError("median_estimate: no PELs");
  return {median_of(std::move(xs)), median_of(std::move(ys))};
}

Eigen::Matrix2d spatial_variance(const PelSet& pels) {
  std::vector<double> xs, ys;
  split_coordinates(pels, xs, ys);
  if (xs.size() < 2) throw DataError("spatial_variance: need at least 2 PELs");
  Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
  r(0, 0) = std::max(sample_variance(xs), kVarianceFloor);
  r(1, 1) = std::max(sample_variance(ys), kVarianceFloor);
  return r;
}

CdaEstimate locate_cda(const RttSnapshot& snapshot, std::span<const Anchor> anchors,
                       const FilterConfig& cfg) {
  CdaEstimate est;
  est.all = generate_pels(snapshot, anchors, cfg.m);
  auto stages = tandem_filter_stages(est.all, cfg);
  est.after_re = std::move(stages.after_re);
  est.filtered = std::move(stages.after_rs);
  est.position = median_estimate(est.filtered);
  if (est.filtered.pels.size() >= 2) est.covariance = spatial_variance(est.filtered);
  return est;
}

}  // namespace cdaloc
