#include "cdaloc/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cdaloc/error.hpp"

namespace cdaloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json points_to_json(const std::vector<Point2D>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Point2D> points_from_json(const json& arr) {
  std::vector<Point2D> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("point must be [x, y]");
    out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return out;
}

}  // namespace

json config_to_json(const ScenarioConfig& cfg) {
  return {
      {"anchors", points_to_json(cfg.anchors)},
      {"trajectory", points_to_json(cfg.trajectory)},
      {"n_experiments", cfg.n_experiments},
      {"delta", cfg.delta},
      {"clean_sigma", cfg.clean_sigma},
      {"nlos_bias_mean", cfg.nlos_bias_mean},
      {"imu_distance_sigma_frac", cfg.imu_distance_sigma_frac},
      {"imu_heading_sigma_rad", cfg.imu_heading_sigma_rad},
      {"steps_per_segment", cfg.steps_per_segment},
      {"seed", cfg.seed},
  };
}

ScenarioConfig config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "anchors", "trajectory", "n_experiments", "delta", "clean_sigma", "nlos_bias_mean",
      "imu_distance_sigma_frac", "imu_heading_sigma_rad", "steps_per_segment", "seed"};
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown field '" + key + "'");
  }

  ScenarioConfig cfg = ScenarioConfig::defaults();
  try {
    if (j.contains("anchors")) cfg.anchors = points_from_json(j.at("anchors"));
    if (j.contains("trajectory")) cfg.trajectory = points_from_json(j.at("trajectory"));
    if (j.contains("n_experiments")) cfg.n_experiments = j.at("n_experiments").get<int>();
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("clean_sigma")) cfg.clean_sigma = j.at("clean_sigma").get<double>();
    if (j.contains("nlos_bias_mean")) cfg.nlos_bias_mean = j.at("nlos_bias_mean").get<double>();
    if (j.contains("imu_distance_sigma_frac")) {
      cfg.imu_distance_sigma_frac = j.at("imu_distance_sigma_frac").get<double>();
    }
    if (j.contains("imu_heading_sigma_rad")) {
      cfg.imu_heading_sigma_rad = j.at("imu_heading_sigma_rad").get<double>();
    }
    if (j.contains("steps_per_segment")) cfg.steps_per_segment = j.at("steps_per_segment").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json experiment_to_json(const Experiment& exp) {
  json anchors = json::array();
  for (const auto& a : exp.anchors) {
    anchors.push_back({{"id", a.id}, {"x", a.position.x}, {"y", a.position.y}});
  }
  json snapshots = json::array();
  for (const auto& s : exp.snapshots) {
    json entries = json::array();
    for (const auto& e : s.entries) {
      entries.push_back({{"anchor_id", e.anchor_id}, {"tau_ns", e.tau_ns}, {"los", e.los}});
    }
    snapshots.push_back(std::move(entries));
  }
  json segments = json::array();
  for (const auto& seg : exp.segments) {
    json steps = json::array();
    for (const auto& st : seg) steps.push_back({{"d_m", st.distance}, {"theta_rad", st.heading}});
    segments.push_back(std::move(steps));
  }
  return {{"experiment_index", exp.index},
          {"anchors", std::move(anchors)},
          {"truths", points_to_json(exp.truths)},
          {"snapshots", std::move(snapshots)},
          {"segments", std::move(segments)}};
}

Experiment experiment_from_json(const json& j) {
  Experiment exp;
  try {
    exp.index = j.at("experiment_index").get<int>();
    for (const auto& a : j.at("anchors")) {
      exp.anchors.push_back({a.at("id").get<int>(), {a.at("x").get<double>(), a.at("y").get<double>()}});
    }
    exp.truths = points_from_json(j.at("truths"));
    int mp = 1;
    for (const auto& snap : j.at("snapshots")) {
      RttSnapshot s;
      s.mp = mp++;
      for (const auto& e : snap) {
        s.entries.push_back({e.at("anchor_id").get<int>(), e.at("tau_ns").get<double>(),
                             e.value("los", true)});
      }
      exp.snapshots.push_back(std::move(s));
    }
    if (j.contains("segments")) {
      for (const auto& seg : j.at("segments")) {
        std::vector<StepEvent> steps;
        for (const auto& st : seg) {
          steps.push_back({st.at("d_m").get<double>(), st.at("theta_rad").get<double>()});
        }
        exp.segments.push_back(std::move(steps));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("experiment json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("experiment json: ") + e.what());
  }
  exp.validate();
  return exp;
}

std::vector<fs::path> save_experiments(const fs::path& dir, const std::vector<Experiment>& experiments) {
  fs::create_directories(dir);
  std::vector<fs::path> paths;
  for (const auto& exp : experiments) {
    char name[64];
    std::snprintf(name, sizeof(name), "experiment_%02d.json", exp.index);
    const fs::path p = dir / name;
    write_text_file(p, dump_json(experiment_to_json(exp)));
    paths.push_back(p);
  }
  return paths;
}

std::vector<Experiment> load_experiments(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("experiment directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("experiment_", 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError("no experiment_*.json files in " + dir.string());

  std::vector<Experiment> out;
  for (const auto& f : files) {
    try {
      out.push_back(experiment_from_json(json::parse(read_text_file(f))));
    } catch (const json::parse_error& e) {
      throw DataError(f.string() + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const Experiment& a, const Experiment& b) { return a.index < b.index; });
  return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cdaloc
