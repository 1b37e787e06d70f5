#pragma once

// Fingerprint-based positioning trained on CDA-generated labels: feature
// construction, train/test splitting, a random-forest regressor, a k-NN
// baseline and the repeated-split evaluation protocol.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cdaloc/bench.hpp"
#include "cdaloc/cda.hpp"
#include "cdaloc/data.hpp"
#include "cdaloc/fusion.hpp"

namespace cdaloc {

enum class FeatureKind { RawRtts, AllPels, RemainingPels };
enum class LabelKind { GroundTruth, CdaOnly, CdaPdr };
enum class ModelKind { Forest, Knn };

std::string_view feature_name(FeatureKind k);
std::string_view label_name(LabelKind k);
std::string_view model_name(ModelKind k);
FeatureKind parse_feature(std::string_view s);
LabelKind parse_label(std::string_view s);
ModelKind parse_model(std::string_view s);

/// Per-experiment pipeline products needed for features and labels.
struct ExperimentOutputs {
  std::vector<CdaEstimate> cda;
  std::vector<TrajectoryPoint> kf;  // updating-covariance fusion
};

/// CDA on every MP plus the updating-covariance Kalman trajectory, run in
/// parallel across experiments.
std::vector<ExperimentOutputs> run_pipeline(std::span<const Experiment> experiments,
                                            const FilterConfig& filter);

/// RawRtts: tau [ns] in anchor order. AllPels: (x, y) of every PEL in
/// combination order, degenerate slots filled with the MP's CDA estimate.
/// RemainingPels: (x, y) of the filtered PELs in combination order.
std::vector<double> build_features(const RttSnapshot& snapshot, std::span<const Anchor> anchors,
                                   const CdaEstimate& cda, FeatureKind kind);

struct LabeledSample {
  int id = 0;
  int experiment = 0;
  int mp = 0;
  std::vector<double> features;
  Point2D label;
  Point2D truth;  // evaluation only
};

/// One sample per (experiment, MP). All feature vectors share one length or
/// DataError is thrown.
std::vector<LabeledSample> build_dataset(std::span<const Experiment> experiments,
                                         std::span<const ExperimentOutputs> outputs,
                                         FeatureKind features, LabelKind label);

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// Seeded shuffle, first floor(n * train_fraction) samples train.
DatasetSplit split_dataset(std::span<const LabeledSample> samples, double train_fraction,
                           std::uint64_t seed);

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Point2D predict(std::span<const double> features) const = 0;
};

struct ForestParams {
  int n_trees = 500;
  double feature_fraction = 1.0 / 3.0;
  int min_leaf = 2;
  int max_depth = 0;  // 0 = unlimited
  bool bootstrap = true;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Regression tree in flat arrays; feature < 0 marks a leaf.
struct RegressionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value_x;
  std::vector<double> value_y;

  Point2D predict(std::span<const double> x) const;
  std::size_t node_count() const { return feature.size(); }
};

class RandomForest : public Regressor {
 public:
  RandomForest() = default;
  RandomForest(std::size_t n_features, std::vector<RegressionTree> trees)
      : n_features_(n_features), trees_(std::move(trees)) {}

  Point2D predict(std::span<const double> features) const override;

  std::size_t n_features() const { return n_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  nlohmann::json to_json() const;
  static RandomForest from_json(const nlohmann::json& j);

 private:
  std::size_t n_features_ = 0;
  std::vector<RegressionTree> trees_;
};

/// Each tree: optional bootstrap rows, a random subset of
/// ceil(D * feature_fraction) features, greedy splits minimizing the summed
/// per-axis squared error of the 2D label, leaves holding the mean label.
RandomForest train_forest(std::span<const LabeledSample> train, const ForestParams& params);

class KnnRegressor : public Regressor {
 public:
  KnnRegressor(std::size_t dim, int k, std::vector<double> features, std::vector<Point2D> labels);

  /// Inverse-distance weighted mean of the k nearest labels; exact feature
  /// matches return the mean of the matching labels.
  Point2D predict(std::span<const double> features) const override;

  std::size_t size() const { return labels_.size(); }

 private:
  std::size_t dim_;
  int k_;
  std::vector<double> features_;  // row-major, size() x dim_
  std::vector<Point2D> labels_;
};

KnnRegressor train_knn(std::span<const LabeledSample> train, int k = 5);

struct FbpEvaluation {
  ErrorStats model;  // prediction vs truth
  ErrorStats label;  // the samples' own labels vs truth
};

FbpEvaluation evaluate(const Regressor& model, std::span<const LabeledSample> test);

struct FbpProtocol {
  int repeats = 5;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  ForestParams forest;
  int knn_k = 5;
};

struct FbpCell {
  FeatureKind feature;
  LabelKind label;
  ModelKind model;
  std::vector<FbpEvaluation> repeats;

  /// Means over repeats of the per-repeat avg and std.
  double model_avg() const;
  double model_std() const;
  double label_avg() const;
  double label_std() const;
};

/// Repeated random splits over every requested (feature, label, model) cell.
/// Repeat r uses the same split for every cell.
std::vector<FbpCell> run_fbp_protocol(std::span<const Experiment> experiments,
                                      std::span<const ExperimentOutputs> outputs,
                                      std::span<const FeatureKind> features,
                                      std::span<const LabelKind> labels,
                                      std::span<const ModelKind> models,
                                      const FbpProtocol& protocol);

}  // namespace cdaloc
