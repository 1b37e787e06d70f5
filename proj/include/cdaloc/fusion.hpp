#pragma once

// Pedestrian dead reckoning and the Kalman fusion of the CDA measurement
// estimate (ME) with the PDR prediction estimate (PE).

#include <span>
#include <vector>

#include <Eigen/Core>

#include "cdaloc/cda.hpp"
#include "cdaloc/data.hpp"

namespace cdaloc {

struct MobilityEstimate {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();  // displacement [m]
  Eigen::Matrix2d q = Eigen::Matrix2d::Identity();  // covariance [m^2]
};

struct KfState {
  Point2D y;
  Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
};

/// Sums the step vectors (d cos theta, d sin theta). The per-axis covariance is
/// the sample variance of the step components times the step count, floored
/// at kVarianceFloor; a single step yields the floor.
MobilityEstimate accumulate_mobility(std::span<const StepEvent> steps);

/// One predict/correct cycle:
///   PE = y + v,  P- = P + Q,  G = P- (P- + R)^-1,
///   y+ = G me + (I - G) PE,  P+ = (I - G) P-.
KfState kf_update(const KfState& prior, const MobilityEstimate& mobility, Point2D me,
                  const Eigen::Matrix2d& r);

/// Kalman gain used by kf_update for the given predicted covariance.
Eigen::Matrix2d kalman_gain(const Eigen::Matrix2d& p_pred, const Eigen::Matrix2d& r);

enum class CovarianceMode {
  Updating,       // R from PEL spread, Q from step spread
  Deterministic,  // R = Q = I
};

struct TrajectoryPoint {
  int mp = 0;
  Point2D y;
  Eigen::Matrix2d p;
  Point2D me;  // CDA estimate at this MP
  Point2D pe;  // prediction (equals me at the first MP)
};

/// Runs the filter over an experiment whose per-MP CDA estimates are already
/// available. The first MP initializes y with the CDA estimate and P with its
/// covariance (I in deterministic mode). Throws DataError when IMU segments
/// are missing.
std::vector<TrajectoryPoint> run_trajectory(const Experiment& experiment,
                                            std::span<const CdaEstimate> cda,
                                            CovarianceMode mode);

/// Convenience overload that runs CDA on every snapshot first.
std::vector<TrajectoryPoint> run_trajectory(const Experiment& experiment,
                                            const FilterConfig& filter, CovarianceMode mode);

/// CDA on every snapshot of the experiment, in MP order.
std::vector<CdaEstimate> locate_experiment_cda(const Experiment& experiment,
                                               const FilterConfig& filter);

}  // namespace cdaloc
