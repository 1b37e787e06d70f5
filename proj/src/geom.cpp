#include "cdaloc/geom.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "cdaloc/error.hpp"

namespace cdaloc {

double rtt_to_range(double tau_seconds) {
  if (!(tau_seconds >= 0.0)) {
    throw std::domain_error("rtt_to_range: negative or NaN round-trip time");
  }
  return kSpeedOfLight * tau_seconds / 2.0;
}

double range_to_rtt(double range_m) {
  if (!(range_m >= 0.0)) {
    throw std::domain_error("range_to_rtt: negative or NaN range");
  }
  return 2.0 * range_m / kSpeedOfLight;
}

double euclidean(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

void check_inputs(std::span<const Anchor> anchors, const RangeVector& ranges) {
  if (anchors.size() < 3) {
    throw ConfigError("trilateration needs at least 3 anchors, got " +
                      std::to_string(anchors.size()));
  }
  if (ranges.size() != anchors.size()) {
    throw ConfigError("trilateration: range vector not aligned with anchors");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (ranges[i].anchor_id != anchors[i].id) {
      throw ConfigError("trilateration: range entry " + std::to_string(i) +
                        " refers to anchor " + std::to_string(ranges[i].anchor_id) +
                        " but anchor list has " + std::to_string(anchors[i].id));
    }
    if (!(ranges[i].range >= 0.0)) {
      throw ConfigError("trilateration: negative range for anchor " +
                        std::to_string(ranges[i].anchor_id));
    }
  }
}

}  // namespace

Point2D lls_trilaterate_with_reference(std::span<const Anchor> anchors,
                                       const RangeVector& ranges,
                                       std::size_t reference) {
  check_inputs(anchors, ranges);
  if (reference >= anchors.size()) {
    throw ConfigError("trilateration: reference index out of range");
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(anchors.size() - 1);
  Eigen::MatrixX2d a(rows, 2);
  Eigen::VectorXd b(rows);

  const Point2D pr = anchors[reference].position;
  const double dr = ranges[reference].range;
  const double pr_norm2 = pr.x * pr.x + pr.y * pr.y;

  Eigen::Index row = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (i == reference) continue;
    const Point2D pi = anchors[i].position;
    const double di = ranges[i].range;
    a(row, 0) = 2.0 * (pr.x - pi.x);
    a(row, 1) = 2.0 * (pr.y - pi.y);
    b(row) = (di * di - dr * dr) - ((pi.x * pi.x + pi.y * pi.y) - pr_norm2);
    ++row;
  }

  if (rows < 2) {
    throw DegenerateGeometry("trilateration: fewer than two independent equations");
  }

  const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::MatrixX2d>(a).singularValues();
  const double cond = sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxConditionNumber)) {
    throw DegenerateGeometry("trilateration: condition number " + std::to_string(cond) +
                             " exceeds limit");
  }

  const Eigen::Vector2d x = a.householderQr().solve(b);
  return Point2D::from(x);
}

Point2D lls_rs_trilaterate(std::span<const Anchor> anchors, const RangeVector& ranges) {
  check_inputs(anchors, ranges);
  std::size_t reference = 0;
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    // Strict comparison: ties go to the earliest anchor.
    if (ranges[i].range < ranges[reference].range) reference = i;
  }
  return lls_trilaterate_with_reference(anchors, ranges, reference);
}

}  // namespace cdaloc
