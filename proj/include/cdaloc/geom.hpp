#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace cdaloc {

/// Speed of light in vacuum [m/s]. Shared by the simulator and every solver so
/// that RTT <-> range round trips are exact up to floating point.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Condition number of the stacked trilateration matrix above which an anchor
/// subset is treated as collinear.
inline constexpr double kMaxConditionNumber = 1e8;

/// Planar position in meters.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;

  Eigen::Vector2d vec() const { return {x, y}; }
  static Point2D from(const Eigen::Vector2d& v) { return {v.x(), v.y()}; }
};

inline Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
inline Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }

struct Anchor {
  int id = 0;
  Point2D position;
};

struct RangeEntry {
  int anchor_id = 0;
  double range = 0.0;  // meters
};

/// Ranges keyed by anchor id, in the same order as the anchor list they are
/// solved against.
using RangeVector = std::vector<RangeEntry>;

/// Converts a round-trip time [s] into a one-way range [m].
/// Throws std::domain_error for negative input.
double rtt_to_range(double tau_seconds);

/// Inverse of rtt_to_range.
double range_to_rtt(double range_m);

double euclidean(Point2D a, Point2D b);

/// Linear least squares trilateration with reference selection (LLS-RS).
///
/// The reference anchor is the one with the smallest measured range. Each other
/// anchor i contributes the row
///   2 (p_r - p_i)^T x = (d_i^2 - d_r^2) - (|p_i|^2 - |p_r|^2)
/// and the stacked system is solved by Householder QR. If the condition number
/// of the stacked matrix exceeds kMaxConditionNumber, DegenerateGeometry is
/// thrown.
///
/// `ranges` must be aligned with `anchors` (same length, same ids in order).
Point2D lls_rs_trilaterate(std::span<const Anchor> anchors, const RangeVector& ranges);

/// Same as lls_rs_trilaterate but with the reference anchor given explicitly
/// by its position in `anchors`.
Point2D lls_trilaterate_with_reference(std::span<const Anchor> anchors,
                                       const RangeVector& ranges,
                                       std::size_t reference);

}  // namespace cdaloc
