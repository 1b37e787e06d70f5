#include "cdaloc/data.hpp"

#include <string>

#include "cdaloc/error.hpp"

namespace cdaloc {

std::optional<RttEntry> RttSnapshot::find(int anchor_id) const {
  for (const auto& e : entries) {
    if (e.anchor_id == anchor_id) return e;
  }
  return std::nullopt;
}

const RttEntry& RttSnapshot::at(int anchor_id) const {
  for (const auto& e : entries) {
    if (e.anchor_id == anchor_id) return e;
  }
  throw DataError("snapshot for MP " + std::to_string(mp) + " has no RTT for anchor " +
                  std::to_string(anchor_id));
}

void Experiment::validate() const {
  const std::string where = "experiment " + std::to_string(index) + ": ";
  if (anchors.size() < 3) throw DataError(where + "fewer than 3 anchors");
  if (snapshots.empty()) throw DataError(where + "no measurement points");
  if (truths.size() != snapshots.size()) {
    throw DataError(where + "truth count does not match snapshot count");
  }
  if (!segments.empty() && segments.size() + 1 != snapshots.size()) {
    throw DataError(where + "expected " + std::to_string(snapshots.size() - 1) +
                    " IMU segments, got " + std::to_string(segments.size()));
  }
  for (const auto& snap : snapshots) {
    for (const auto& a : anchors) {
      const auto& e = snap.at(a.id);
      if (!(e.tau_ns >= 0.0)) {
        throw DataError(where + "negative RTT at MP " + std::to_string(snap.mp));
      }
    }
  }
  for (const auto& seg : segments) {
    for (const auto& s : seg) {
      if (!(s.distance >= 0.0)) throw DataError(where + "negative step distance");
    }
  }
}

}  // namespace cdaloc
