#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cdaloc/error.hpp"
#include "cdaloc/fbp.hpp"
#include "cdaloc/parallel.hpp"
#include "cdaloc/sim.hpp"

namespace cdaloc {

std::string_view feature_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::RawRtts: return "raw_rtts";
    case FeatureKind::AllPels: return "all_pels";
    case FeatureKind::RemainingPels: return "remaining_pels";
  }
  return "unknown";
}

std::string_view label_name(LabelKind k) {
  switch (k) {
    case LabelKind::GroundTruth: return "truth";
    case LabelKind::CdaOnly: return "cda";
    case LabelKind::CdaPdr: return "cda_pdr";
  }
  return "unknown";
}

std::string_view model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Forest: return "rf";
    case ModelKind::Knn: return "knn";
  }
  return "unknown";
}

FeatureKind parse_feature(std::string_view s) {
  for (auto k : {FeatureKind::RawRtts, FeatureKind::AllPels, FeatureKind::RemainingPels}) {
    if (feature_name(k) == s) return k;
  }
  throw ConfigError("unknown feature kind '" + std::string(s) +
                    "' (expected raw_rtts, all_pels, remaining_pels)");
}

LabelKind parse_label(std::string_view s) {
  for (auto k : {LabelKind::GroundTruth, LabelKind::CdaOnly, LabelKind::CdaPdr}) {
    if (label_name(k) == s) return k;
  }
  throw ConfigError("unknown label kind '" + std::string(s) + "' (expected truth, cda, cda_pdr)");
}

ModelKind parse_model(std::string_view s) {
  for (auto k : {ModelKind::Forest, ModelKind::Knn}) {
    if (model_name(k) == s) return k;
  }
  throw ConfigError("unknown model '" + std::string(s) + "' (expected rf, knn)");
}

std::vector<ExperimentOutputs> run_pipeline(std::span<const Experiment> experiments,
                                            const FilterConfig& filter) {
  std::vector<ExperimentOutputs> out(experiments.size());
  parallel_for(experiments.size(), [&](std::size_t e) {
    out[e].cda = locate_experiment_cda(experiments[e], filter);
    out[e].kf = run_trajectory(experiments[e], out[e].cda, CovarianceMode::Updating);
  });
  return out;
}

std::vector<double> build_features(const RttSnapshot& snapshot, std::span<const Anchor> anchors,
                                   const CdaEstimate& cda, FeatureKind kind) {
  std::vector<double> f;
  switch (kind) {
    case FeatureKind::RawRtts:
      f.reserve(anchors.size());
      for (const auto& a : anchors) f.push_back(snapshot.at(a.id).tau_ns);
      break;
    case FeatureKind::AllPels:
      if (cda.all.pels.empty()) throw DataError("build_features: PEL set missing");
      f.reserve(2 * cda.all.pels.size());
      for (const auto& p : cda.all.pels) {
        const Point2D z = p.position.value_or(cda.position);
        f.push_back(z.x);
        f.push_back(z.y);
      }
      break;
    case FeatureKind::RemainingPels: {
      if (cda.filtered.pels.empty()) throw DataError("build_features: filtered PEL set missing");
      std::vector<const Pel*> kept;
      for (const auto& p : cda.filtered.pels) kept.push_back(&p);
      std::sort(kept.begin(), kept.end(), [](const Pel* a, const Pel* b) {
        return a->combination.index < b->combination.index;
      });
      f.reserve(2 * kept.size());
      for (const Pel* p : kept) {
        f.push_back(p->position->x);
        f.push_back(p->position->y);
      }
      break;
    }
  }
  return f;
}

std::vector<LabeledSample> build_dataset(std::span<const Experiment> experiments,
                                         std::span<const ExperimentOutputs> outputs,
                                         FeatureKind features, LabelKind label) {
  if (experiments.size() != outputs.size()) {
    throw DataError("build_dataset: pipeline outputs do not match experiments");
  }
  std::vector<LabeledSample> samples;
  int id = 0;
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    const auto& exp = experiments[e];
    const auto& out = outputs[e];
    if (out.cda.size() != exp.mp_count()) throw DataError("build_dataset: missing CDA stage");
    if (label == LabelKind::CdaPdr && out.kf.size() != exp.mp_count()) {
      throw DataError("build_dataset: missing fusion stage");
    }
    for (std::size_t k = 0; k < exp.mp_count(); ++k) {
      LabeledSample s;
      s.id = ++id;
      s.experiment = exp.index;
      s.mp = exp.snapshots[k].mp;
      s.features = build_features(exp.snapshots[k], exp.anchors, out.cda[k], features);
      s.truth = exp.truths[k];
      switch (label) {
        case LabelKind::GroundTruth: s.label = s.truth; break;
        case LabelKind::CdaOnly: s.label = out.cda[k].position; break;
        case LabelKind::CdaPdr: s.label = out.kf[k].y; break;
      }
      if (!samples.empty() && s.features.size() != samples.front().features.size()) {
        throw DataError("build_dataset: feature length varies across samples (" +
                        std::to_string(s.features.size()) + " vs " +
                        std::to_string(samples.front().features.size()) + ")");
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

DatasetSplit split_dataset(std::span<const LabeledSample> samples, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split_dataset: train fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(samples.size()) * train_fraction + 1e-9));
  DatasetSplit split;
  split.train.reserve(n_train);
  split.test.reserve(samples.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.test).push_back(samples[order[i]]);
  }
  return split;
}

FbpEvaluation evaluate(const Regressor& model, std::span<const LabeledSample> test) {
  if (test.empty()) throw DataError("evaluate: empty test set");
  std::vector<Point2D> predictions, labels, truths;
  for (const auto& s : test) {
    predictions.push_back(model.predict(s.features));
    labels.push_back(s.label);
    truths.push_back(s.truth);
  }
  return {error_stats(predictions, truths), error_stats(labels, truths)};
}

namespace {

double mean_of(const std::vector<FbpEvaluation>& reps, double (*pick)(const FbpEvaluation&)) {
  if (reps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : reps) sum += pick(r);
  return sum / static_cast<double>(reps.size());
}

}  // namespace

double FbpCell::model_avg() const {
  return mean_of(repeats, [](const FbpEvaluation& e) { return e.model.avg; });
}
double FbpCell::model_std() const {
  return mean_of(repeats, [](const FbpEvaluation& e) { return e.model.std; });
}
double FbpCell::label_avg() const {
  return mean_of(repeats, [](const FbpEvaluation& e) { return e.label.avg; });
}
double FbpCell::label_std() const {
  return mean_of(repeats, [](const FbpEvaluation& e) { return e.label.std; });
}

std::vector<FbpCell> run_fbp_protocol(std::span<const Experiment> experiments,
                                      std::span<const ExperimentOutputs> outputs,
                                      std::span<const FeatureKind> features,
                                      std::span<const LabelKind> labels,
                                      std::span<const ModelKind> models,
                                      const FbpProtocol& protocol) {
  if (protocol.repeats < 1) throw ConfigError("fbp: repeats must be positive");
  std::vector<FbpCell> cells;
  for (FeatureKind f : features) {
    for (LabelKind l : labels) {
      const auto samples = build_dataset(experiments, outputs, f, l);
      for (ModelKind m : models) {
        FbpCell cell{f, l, m, {}};
        for (int r = 0; r < protocol.repeats; ++r) {
          const auto rep = static_cast<std::uint64_t>(r);
          const auto split =
              split_dataset(samples, protocol.train_fraction, derive_seed(protocol.seed, "split", rep));
          if (m == ModelKind::Forest) {
            ForestParams params = protocol.forest;
            params.seed = derive_seed(protocol.seed, "forest", rep);
            cell.repeats.push_back(evaluate(train_forest(split.train, params), split.test));
          } else {
            cell.repeats.push_back(evaluate(train_knn(split.train, protocol.knn_k), split.test));
          }
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

}  // namespace cdaloc
