#include "cdaloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cdaloc/error.hpp"

namespace cdaloc {

MobilityEstimate accumulate_mobility(std::span<const StepEvent> steps) {
  if (steps.empty()) throw DataError("accumulate_mobility: no steps");

  const std::size_t n = steps.size();
  std::vector<double> vx(n), vy(n);
  MobilityEstimate out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(steps[i].distance >= 0.0)) throw DataError("accumulate_mobility: negative step");
    vx[i] = steps[i].distance * std::cos(steps[i].heading);
    vy[i] = steps[i].distance * std::sin(steps[i].heading);
    out.v.x() += vx[i];
    out.v.y() += vy[i];
  }

  auto summed_variance = [n](const std::vector<double>& c) {
    if (n < 2) return kVarianceFloor;
    double mean = 0.0;
    for (double x : c) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : c) ss += (x - mean) * (x - mean);
    const double per_step = ss / static_cast<double>(n - 1);
    return std::max(per_step * static_cast<double>(n), kVarianceFloor);
  };

  out.q = Eigen::Matrix2d::Zero();
  out.q(0, 0) = summed_variance(vx);
  out.q(1, 1) = summed_variance(vy);
  return out;
}

Eigen::Matrix2d kalman_gain(const Eigen::Matrix2d& p_pred, const Eigen::Matrix2d& r) {
  const Eigen::Matrix2d s = p_pred + r;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(s);
  if (!lu.isInvertible()) throw DataError("kalman_gain: innovation covariance is singular");
  return p_pred * lu.inverse();
}

KfState kf_update(const KfState& prior, const MobilityEstimate& mobility, Point2D me,
                  const Eigen::Matrix2d& r) {
  const Eigen::Vector2d pe = prior.y.vec() + mobility.v;
  const Eigen::Matrix2d p_pred = prior.p + mobility.q;
  const Eigen::Matrix2d g = kalman_gain(p_pred, r);
  const Eigen::Matrix2d i_minus_g = Eigen::Matrix2d::Identity() - g;

  KfState post;
  post.y = Point2D::from(g * me.vec() + i_minus_g * pe);
  post.p = i_minus_g * p_pred;
  post.p = 0.5 * (post.p + post.p.transpose()).eval();
  return post;
}

std::vector<CdaEstimate> locate_experiment_cda(const Experiment& experiment,
                                               const FilterConfig& filter) {
  std::vector<CdaEstimate> out;
  out.reserve(experiment.snapshots.size());
  for (const auto& snap : experiment.snapshots) {
    out.push_back(locate_cda(snap, experiment.anchors, filter));
  }
  return out;
}

namespace {

Eigen::Matrix2d measurement_covariance(const CdaEstimate& est, int mp) {
  if (!est.covariance) {
    throw DataError("MP " + std::to_string(mp) +
                    ": fewer than two filtered PELs, no measurement covariance");
  }
  return *est.covariance;
}

}  // namespace

std::vector<TrajectoryPoint> run_trajectory(const Experiment& experiment,
                                            std::span<const CdaEstimate> cda,
                                            CovarianceMode mode) {
  const std::size_t n = experiment.snapshots.size();
  if (cda.size() != n) throw DataError("run_trajectory: CDA estimates do not match MP count");
  if (n == 0) return {};
  if (n > 1 && experiment.segments.size() + 1 != n) {
    throw DataError("experiment " + std::to_string(experiment.index) +
                    ": missing IMU segments (need " + std::to_string(n - 1) + ", have " +
                    std::to_string(experiment.segments.size()) + ")");
  }

  const bool updating = mode == CovarianceMode::Updating;
  std::vector<TrajectoryPoint> out;
  out.reserve(n);

  KfState state;
  state.y = cda[0].position;
  state.p = updating ? measurement_covariance(cda[0], experiment.snapshots[0].mp)
                     : Eigen::Matrix2d::Identity();
  out.push_back({experiment.snapshots[0].mp, state.y, state.p, cda[0].position, cda[0].position});

  for (std::size_t k = 1; k < n; ++k) {
    const auto& steps = experiment.segments[k - 1];
    if (steps.empty()) {
      throw DataError("experiment " + std::to_string(experiment.index) + ": empty IMU segment " +
                      std::to_string(k));
    }
    MobilityEstimate mob = accumulate_mobility(steps);
    Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
    if (updating) {
      r = measurement_covariance(cda[k], experiment.snapshots[k].mp);
    } else {
      mob.q = Eigen::Matrix2d::Identity();
    }
    const Point2D pe = state.y + Point2D::from(mob.v);
    state = kf_update(state, mob, cda[k].position, r);
    out.push_back({experiment.snapshots[k].mp, state.y, state.p, cda[k].position, pe});
  }
  return out;
}

std::vector<TrajectoryPoint> run_trajectory(const Experiment& experiment,
                                            const FilterConfig& filter, CovarianceMode mode) {
  const auto cda = locate_experiment_cda(experiment, filter);
  return run_trajectory(experiment, cda, mode);
}

}  // namespace cdaloc
