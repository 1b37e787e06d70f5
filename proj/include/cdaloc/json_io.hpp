#pragma once

// JSON documents for scenario configs and generated experiments.
//
// Config: an object whose keys mirror ScenarioConfig fields; missing keys take
// the defaults, unknown keys are rejected. Points are [x, y] pairs.
//
// Experiment:
//   { "experiment_index": 1,
//     "anchors":   [ {"id": 1, "x": 5.0, "y": 0.5}, ... ],
//     "truths":    [ [x, y], ... ],
//     "snapshots": [ [ {"anchor_id": 1, "tau_ns": 83.1, "los": true}, ... ], ... ],
//     "segments":  [ [ {"d_m": 0.25, "theta_rad": 0.01}, ... ], ... ] }
// Snapshot k (0-based) belongs to MP k+1; "segments" may be absent.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdaloc/data.hpp"
#include "cdaloc/sim.hpp"

namespace cdaloc {

nlohmann::json config_to_json(const ScenarioConfig& cfg);
/// Throws ConfigError on malformed input.
ScenarioConfig config_from_json(const nlohmann::json& j);
/// Throws ConfigError when the file is missing or malformed.
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::json experiment_to_json(const Experiment& exp);
/// Throws DataError on malformed input.
Experiment experiment_from_json(const nlohmann::json& j);

/// experiment_01.json, experiment_02.json, ... in `dir`. Returns the paths.
std::vector<std::filesystem::path> save_experiments(const std::filesystem::path& dir,
                                                    const std::vector<Experiment>& experiments);
/// Every experiment_*.json in `dir`, ordered by experiment index.
std::vector<Experiment> load_experiments(const std::filesystem::path& dir);

/// Stable serialization used for every file this toolkit writes.
std::string dump_json(const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cdaloc
