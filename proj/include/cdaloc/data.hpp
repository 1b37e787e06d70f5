#pragma once

#include <optional>
#include <vector>

#include "cdaloc/geom.hpp"

namespace cdaloc {

/// One measured round-trip time. `los` is simulator ground truth kept for
/// diagnostics; estimators never read it.
struct RttEntry {
  int anchor_id = 0;
  double tau_ns = 0.0;
  bool los = true;

  double tau_seconds() const { return tau_ns * 1e-9; }
};

/// RTTs collected at one measurement point, one entry per anchor.
struct RttSnapshot {
  int mp = 0;  // 1-based measurement point index
  std::vector<RttEntry> entries;

  /// Entry for the given anchor id, or nullopt if not measured.
  std::optional<RttEntry> find(int anchor_id) const;
  /// Like find() but throws DataError when the anchor is missing.
  const RttEntry& at(int anchor_id) const;
};

/// One pedestrian step reported by the IMU.
struct StepEvent {
  double distance = 0.0;  // meters, >= 0
  double heading = 0.0;   // radians, from the +x axis
};

/// One walk around the site: snapshots and truths per MP, and the steps taken
/// between consecutive MPs (segments[k] leads from MP k+1 to MP k+2).
struct Experiment {
  int index = 0;  // 1-based
  std::vector<Anchor> anchors;
  std::vector<RttSnapshot> snapshots;
  std::vector<std::vector<StepEvent>> segments;
  std::vector<Point2D> truths;

  std::size_t mp_count() const { return snapshots.size(); }
  /// Throws DataError when the size invariants do not hold.
  void validate() const;
};

}  // namespace cdaloc
