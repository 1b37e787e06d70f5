#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cdaloc/error.hpp"
#include "cdaloc/fbp.hpp"
#include "cdaloc/parallel.hpp"
#include "cdaloc/sim.hpp"

namespace cdaloc {

void ForestParams::validate() const {
  if (n_trees < 1) throw ConfigError("forest: n_trees must be positive");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
    throw ConfigError("forest: feature_fraction must be in (0, 1]");
  }
  if (min_leaf < 1) throw ConfigError("forest: min_leaf must be positive");
  if (max_depth < 0) throw ConfigError("forest: max_depth must be >= 0");
}

Point2D RegressionTree::predict(std::span<const double> x) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    const auto f = static_cast<std::size_t>(feature[node]);
    node = static_cast<std::size_t>(x[f] <= threshold[node] ? left[node] : right[node]);
  }
  return {value_x[node], value_y[node]};
}

Point2D RandomForest::predict(std::span<const double> features) const {
  if (trees_.empty()) throw DataError("forest: model has no trees");
  if (features.size() != n_features_) {
    throw DataError("forest: expected " + std::to_string(n_features_) + " features, got " +
                    std::to_string(features.size()));
  }
  double sx = 0.0, sy = 0.0;
  for (const auto& t : trees_) {
    const Point2D p = t.predict(features);
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(trees_.size());
  return {sx / n, sy / n};
}

namespace {

struct TrainingView {
  std::size_t dim;
  const std::vector<double>& x;  // row-major
  const std::vector<double>& lx;
  const std::vector<double>& ly;

  double value(int row, int f) const {
    return x[static_cast<std::size_t>(row) * dim + static_cast<std::size_t>(f)];
  }
};

struct Moments {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
  }
  double sse() const {
    if (n == 0) return 0.0;
    return std::max(0.0, sxx - sx * sx / n) + std::max(0.0, syy - sy * sy / n);
  }
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
  std::size_t left_count = 0;
};

Split best_split(const TrainingView& data, const std::vector<int>& rows,
                 const std::vector<int>& features, int min_leaf) {
  Split best;
  const std::size_t n = rows.size();
  const auto leaf = static_cast<std::size_t>(min_leaf);
  std::vector<std::pair<double, int>> sorted(n);

  for (int f : features) {
    for (std::size_t i = 0; i < n; ++i) sorted[i] = {data.value(rows[i], f), rows[i]};
    std::sort(sorted.begin(), sorted.end());

    Moments total;
    for (const auto& [v, r] : sorted) total.add(data.lx[static_cast<std::size_t>(r)], data.ly[static_cast<std::size_t>(r)]);

    Moments left;
    for (std::size_t i = 1; i < n; ++i) {
      const int r = sorted[i - 1].second;
      left.add(data.lx[static_cast<std::size_t>(r)], data.ly[static_cast<std::size_t>(r)]);
      if (i < leaf || n - i < leaf) continue;
      if (!(sorted[i - 1].first < sorted[i].first)) continue;
      Moments right;
      right.n = total.n - left.n;
      right.sx = total.sx - left.sx;
      right.sy = total.sy - left.sy;
      right.sxx = total.sxx - left.sxx;
      right.syy = total.syy - left.syy;
      const double sse = left.sse() + right.sse();
      if (sse < best.sse) {
        double thr = 0.5 * (sorted[i - 1].first + sorted[i].first);
        if (!(thr < sorted[i].first)) thr = sorted[i - 1].first;
        best = {f, thr, sse, i};
      }
    }
  }
  return best;
}

RegressionTree grow_tree(const TrainingView& data, std::size_t n_rows, const ForestParams& params,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);

  std::vector<int> rows(n_rows);
  if (params.bootstrap) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n_rows) - 1);
    for (auto& r : rows) r = pick(rng);
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }

  const std::size_t want = std::min<std::size_t>(
      data.dim, static_cast<std::size_t>(
                    std::ceil(static_cast<double>(data.dim) * params.feature_fraction - 1e-9)));
  std::vector<int> features(data.dim);
  std::iota(features.begin(), features.end(), 0);
  for (std::size_t i = 0; i < want; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, data.dim - 1);
    std::swap(features[i], features[pick(rng)]);
  }
  features.resize(std::max<std::size_t>(want, 1));
  std::sort(features.begin(), features.end());

  RegressionTree tree;
  auto new_node = [&tree] {
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value_x.push_back(0.0);
    tree.value_y.push_back(0.0);
    return static_cast<int>(tree.feature.size() - 1);
  };

  struct Pending {
    int node;
    std::vector<int> rows;
    int depth;
  };
  std::vector<Pending> stack;
  stack.push_back({new_node(), std::move(rows), 0});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto node = static_cast<std::size_t>(cur.node);

    Moments m;
    for (int r : cur.rows) m.add(data.lx[static_cast<std::size_t>(r)], data.ly[static_cast<std::size_t>(r)]);
    tree.value_x[node] = m.sx / m.n;
    tree.value_y[node] = m.sy / m.n;

    const double parent_sse = m.sse();
    const bool depth_capped = params.max_depth > 0 && cur.depth >= params.max_depth;
    if (depth_capped || cur.rows.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
        parent_sse <= 1e-12) {
      continue;
    }

    const Split split = best_split(data, cur.rows, features, params.min_leaf);
    if (split.feature < 0 || !(split.sse < parent_sse)) continue;

    std::vector<int> left_rows, right_rows;
    for (int r : cur.rows) {
      (data.value(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    tree.feature[node] = split.feature;
    tree.threshold[node] = split.threshold;
    const int l = new_node();
    const int r = new_node();
    tree.left[node] = l;
    tree.right[node] = r;
    stack.push_back({r, std::move(right_rows), cur.depth + 1});
    stack.push_back({l, std::move(left_rows), cur.depth + 1});
  }
  return tree;
}

}  // namespace

RandomForest train_forest(std::span<const LabeledSample> train, const ForestParams& params) {
  params.validate();
  if (train.empty()) throw DataError("train_forest: empty training set");
  const std::size_t dim = train.front().features.size();
  if (dim == 0) throw DataError("train_forest: zero-length features");

  std::vector<double> x;
  std::vector<double> lx, ly;
  x.reserve(train.size() * dim);
  for (const auto& s : train) {
    if (s.features.size() != dim) throw DataError("train_forest: inconsistent feature length");
    x.insert(x.end(), s.features.begin(), s.features.end());
    lx.push_back(s.label.x);
    ly.push_back(s.label.y);
  }
  const TrainingView view{dim, x, lx, ly};

  std::vector<RegressionTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(trees.size(), [&](std::size_t t) {
    trees[t] = grow_tree(view, train.size(), params, derive_seed(params.seed, "tree", t));
  });
  return RandomForest(dim, std::move(trees));
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    trees.push_back({{"feature", t.feature},
                     {"threshold", t.threshold},
                     {"left", t.left},
                     {"right", t.right},
                     {"value_x", t.value_x},
                     {"value_y", t.value_y}});
  }
  return {{"model", "random_forest"}, {"n_features", n_features_}, {"trees", std::move(trees)}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  try {
    if (j.at("model").get<std::string>() != "random_forest") {
      throw DataError("forest json: unexpected model kind");
    }
    const auto dim = j.at("n_features").get<std::size_t>();
    std::vector<RegressionTree> trees;
    for (const auto& jt : j.at("trees")) {
      RegressionTree t;
      jt.at("feature").get_to(t.feature);
      jt.at("threshold").get_to(t.threshold);
      jt.at("left").get_to(t.left);
      jt.at("right").get_to(t.right);
      jt.at("value_x").get_to(t.value_x);
      jt.at("value_y").get_to(t.value_y);
      const std::size_t n = t.feature.size();
      if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
          t.value_x.size() != n || t.value_y.size() != n) {
        throw DataError("forest json: tree arrays have inconsistent lengths");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (t.feature[i] < 0) continue;
        if (static_cast<std::size_t>(t.feature[i]) >= dim || t.left[i] <= static_cast<int>(i) ||
            t.right[i] <= static_cast<int>(i) || static_cast<std::size_t>(t.left[i]) >= n ||
            static_cast<std::size_t>(t.right[i]) >= n) {
          throw DataError("forest json: malformed node " + std::to_string(i));
        }
      }
      trees.push_back(std::move(t));
    }
    return RandomForest(dim, std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest json: ") + e.what());
  }
}

}  // namespace cdaloc
