#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cdaloc/error.hpp"
#include "cdaloc/fbp.hpp"
#include "cdaloc/kernels.hpp"

namespace cdaloc {

KnnRegressor::KnnRegressor(std::size_t dim, int k, std::vector<double> features,
                           std::vector<Point2D> labels)
    : dim_(dim), k_(k), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != dim_ * labels_.size()) {
    throw DataError("knn: feature matrix does not match label count");
  }
}

Point2D KnnRegressor::predict(std::span<const double> query) const {
  if (labels_.empty()) throw DataError("knn: empty model");
  if (query.size() != dim_) {
    throw DataError("knn: expected " + std::to_string(dim_) + " features, got " +
                    std::to_string(query.size()));
  }

  std::vector<std::pair<double, std::size_t>> dist(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::span<const double> row(features_.data() + i * dim_, dim_);
    dist[i] = {kernels::squared_distance(row, query), i};
  }

  double ex = 0.0, ey = 0.0;
  int exact = 0;
  for (const auto& [d2, i] : dist) {
    if (d2 == 0.0) {
      ex += labels_[i].x;
      ey += labels_[i].y;
      ++exact;
    }
  }
  if (exact > 0) return {ex / exact, ey / exact};

  const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = 1.0 / std::sqrt(dist[j].first);
    wx += w * labels_[dist[j].second].x;
    wy += w * labels_[dist[j].second].y;
    wsum += w;
  }
  return {wx / wsum, wy / wsum};
}

KnnRegressor train_knn(std::span<const LabeledSample> train, int k) {
  if (train.empty()) throw DataError("train_knn: empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw ConfigError("train_knn: k must be in [1, " + std::to_string(train.size()) + "]");
  }
  const std::size_t dim = train.front().features.size();
  std::vector<double> features;
  std::vector<Point2D> labels;
  features.reserve(dim * train.size());
  for (const auto& s : train) {
    if (s.features.size() != dim) throw DataError("train_knn: inconsistent feature length");
    features.insert(features.end(), s.features.begin(), s.features.end());
    labels.push_back(s.label);
  }
  return KnnRegressor(dim, k, std::move(features), std::move(labels));
}

}  // namespace cdaloc
