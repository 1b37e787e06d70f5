#include "cdaloc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdaloc/bench.hpp"
#include "cdaloc/error.hpp"
#include "cdaloc/fbp.hpp"
#include "cdaloc/fusion.hpp"
#include "cdaloc/json_io.hpp"
#include "cdaloc/kernels.hpp"
#include "cdaloc/parallel.hpp"
#include "cdaloc/sim.hpp"

#ifndef CDALOC_VERSION
#define CDALOC_VERSION "dev"
#endif

namespace cdaloc {

namespace fs = std::filesystem;
using nlohmann::json;

const char* toolkit_version() { return CDALOC_VERSION; }

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

struct Options {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
  std::string method = "cda";
  std::string covariance = "all";
  std::string features = "all";
  std::string label = "all";
  std::string model = "all";
  int repeats = 5;
  int trees = 500;
  int bins = 6;
  bool save_model = false;
  std::string manifest;
};

struct Inputs {
  ScenarioConfig config;
  std::uint64_t seed = 1;
  std::vector<Experiment> experiments;
};

ScenarioConfig resolve_config(const Options& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig::defaults() : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

Inputs resolve_inputs(const Options& o) {
  Inputs in;
  in.config = resolve_config(o);
  in.seed = in.config.seed;
  if (!o.data.empty()) {
    in.experiments = load_experiments(o.data);
  } else {
    in.experiments = generate_experiments(in.config);
  }
  return in;
}

std::vector<std::string> canonical_argv(const Options& o, std::uint64_t seed) {
  std::vector<std::string> argv{o.command};
  auto add = [&](const char* flag, const std::string& v) {
    if (!v.empty()) {
      argv.emplace_back(flag);
      argv.push_back(v);
    }
  };
  add("--config", o.config);
  add("--data", o.data);
  argv.emplace_back("--seed");
  argv.push_back(std::to_string(seed));
  if (o.command == "locate") add("--method", o.method);
  if (o.command == "fuse") add("--covariance", o.covariance);
  if (o.command == "fbp") {
    add("--features", o.features);
    add("--label", o.label);
    add("--model", o.model);
    add("--repeats", std::to_string(o.repeats));
    add("--trees", std::to_string(o.trees));
    if (o.save_model) argv.emplace_back("--save-model");
  }
  if (o.command == "rs-report") add("--bins", std::to_string(o.bins));
  return argv;
}

void write_manifest(const Options& o, std::uint64_t seed, const std::vector<fs::path>& outputs,
                    std::chrono::steady_clock::time_point start) {
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back(p.filename().string());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {
      {"toolkit_version", toolkit_version()},
      {"command", o.command},
      {"config", o.config},
      {"data", o.data},
      {"seed", seed},
      {"argv", canonical_argv(o, seed)},
      {"outputs", outs},
      {"simd", kernels::isa_name(kernels::active_isa())},
      {"duration_s", seconds},
  };
  write_text_file(fs::path(o.out) / "manifest.json", dump_json(manifest));
}

const char* kTraceHeader = "experiment,mp,truth_x,truth_y,est_x,est_y,err_m\n";
const char* kSummaryHeader = "method,experiment,avg_m,std_m\n";

/// Appends trace rows and summary rows for one method; returns pooled stats.
ErrorStats emit_method(const std::string& method, const std::vector<Experiment>& exps,
                       const std::vector<std::vector<Point2D>>& estimates, std::string& trace,
                       std::string& summary) {
  std::vector<double> pooled;
  for (std::size_t e = 0; e < exps.size(); ++e) {
    const auto stats = error_stats(estimates[e], exps[e].truths);
    for (std::size_t k = 0; k < estimates[e].size(); ++k) {
      trace += std::to_string(exps[e].index) + "," + std::to_string(exps[e].snapshots[k].mp) + "," +
               num(exps[e].truths[k].x) + "," + num(exps[e].truths[k].y) + "," +
               num(estimates[e][k].x) + "," + num(estimates[e][k].y) + "," +
               num(stats.per_mp_errors[k]) + "\n";
    }
    summary += method + "," + std::to_string(exps[e].index) + "," + num(stats.avg) + "," +
               num(stats.std) + "\n";
    pooled.insert(pooled.end(), stats.per_mp_errors.begin(), stats.per_mp_errors.end());
  }
  const auto all = summarize_errors(std::move(pooled));
  summary += method + ",all," + num(all.avg) + "," + num(all.std) + "\n";
  return all;
}

std::vector<fs::path> cmd_simulate(const Options& o, std::uint64_t& seed_out) {
  const ScenarioConfig cfg = resolve_config(o);
  seed_out = cfg.seed;
  const auto exps = generate_experiments(cfg);
  auto paths = save_experiments(o.out, exps);
  const fs::path scenario = fs::path(o.out) / "scenario.json";
  write_text_file(scenario, dump_json(config_to_json(cfg)));
  paths.push_back(scenario);
  std::cout << "wrote " << exps.size() << " experiments to " << o.out << "\n";
  return paths;
}

std::vector<fs::path> cmd_locate(const Options& o, std::uint64_t& seed_out) {
  std::vector<Method> methods;
  if (o.method == "all") {
    methods = {Method::Llsrs, Method::Cda, Method::Lmes, Method::Rwgh};
  } else {
    methods = {parse_method(o.method)};
  }
  const Inputs in = resolve_inputs(o);
  seed_out = in.seed;
  const FilterConfig filter;

  std::vector<fs::path> paths;
  std::string summary = kSummaryHeader;
  for (Method m : methods) {
    std::vector<std::vector<Point2D>> est(in.experiments.size());
    parallel_for(in.experiments.size(),
                 [&](std::size_t e) { est[e] = locate_experiment(in.experiments[e], m, filter); });
    std::string trace = kTraceHeader;
    const auto all = emit_method(std::string(method_name(m)), in.experiments, est, trace, summary);
    const fs::path p = fs::path(o.out) / ("trace_" + std::string(method_name(m)) + ".csv");
    write_text_file(p, trace);
    paths.push_back(p);
    std::cout << method_name(m) << ": avg " << num(all.avg) << " m, std " << num(all.std) << " m\n";
  }
  const fs::path s = fs::path(o.out) / "summary.csv";
  write_text_file(s, summary);
  paths.push_back(s);
  return paths;
}

std::vector<fs::path> cmd_fuse(const Options& o, std::uint64_t& seed_out) {
  std::vector<CovarianceMode> modes;
  if (o.covariance == "all") {
    modes = {CovarianceMode::Updating, CovarianceMode::Deterministic};
  } else if (o.covariance == "updating") {
    modes = {CovarianceMode::Updating};
  } else if (o.covariance == "deterministic") {
    modes = {CovarianceMode::Deterministic};
  } else {
    throw ConfigError("unknown covariance mode '" + o.covariance +
                      "' (expected updating, deterministic, all)");
  }
  const Inputs in = resolve_inputs(o);
  seed_out = in.seed;
  const FilterConfig filter;

  std::vector<std::vector<CdaEstimate>> cda(in.experiments.size());
  parallel_for(in.experiments.size(),
               [&](std::size_t e) { cda[e] = locate_experiment_cda(in.experiments[e], filter); });

  std::vector<fs::path> paths;
  std::string summary = kSummaryHeader;
  {
    std::vector<std::vector<Point2D>> est(in.experiments.size());
    for (std::size_t e = 0; e < cda.size(); ++e) {
      for (const auto& c : cda[e]) est[e].push_back(c.position);
    }
    std::string unused;
    emit_method("cda", in.experiments, est, unused, summary);
  }
  for (CovarianceMode mode : modes) {
    const std::string name =
        mode == CovarianceMode::Updating ? "cda_pdr_updating" : "cda_pdr_deterministic";
    std::vector<std::vector<Point2D>> est(in.experiments.size());
    parallel_for(in.experiments.size(), [&](std::size_t e) {
      for (const auto& tp : run_trajectory(in.experiments[e], cda[e], mode)) est[e].push_back(tp.y);
    });
    std::string trace = kTraceHeader;
    const auto all = emit_method(name, in.experiments, est, trace, summary);
    const fs::path p = fs::path(o.out) / ("trace_" + name + ".csv");
    write_text_file(p, trace);
    paths.push_back(p);
    std::cout << name << ": avg " << num(all.avg) << " m, std " << num(all.std) << " m\n";
  }
  const fs::path s = fs::path(o.out) / "summary.csv";
  write_text_file(s, summary);
  paths.push_back(s);
  return paths;
}

template <typename Kind, typename Parse>
std::vector<Kind> parse_kinds(const std::string& v, std::initializer_list<Kind> all, Parse parse) {
  if (v == "all") return all;
  return {parse(v)};
}

std::vector<fs::path> cmd_fbp(const Options& o, std::uint64_t& seed_out) {
  const auto features = parse_kinds(
      o.features, {FeatureKind::RawRtts, FeatureKind::AllPels, FeatureKind::RemainingPels},
      parse_feature);
  const auto labels = parse_kinds(
      o.label, {LabelKind::GroundTruth, LabelKind::CdaOnly, LabelKind::CdaPdr}, parse_label);
  const auto models = parse_kinds(o.model, {ModelKind::Forest, ModelKind::Knn}, parse_model);
  if (o.repeats < 1) throw ConfigError("--repeats must be positive");
  if (o.trees < 1) throw ConfigError("--trees must be positive");

  const Inputs in = resolve_inputs(o);
  seed_out = in.seed;
  const auto outputs = run_pipeline(in.experiments, FilterConfig{});

  FbpProtocol protocol;
  protocol.repeats = o.repeats;
  protocol.seed = in.seed;
  protocol.forest.n_trees = o.trees;
  const auto cells = run_fbp_protocol(in.experiments, outputs, features, labels, models, protocol);

  std::string csv = "model,features,label,repeat,avg_m,std_m,label_avg_m,label_std_m\n";
  for (const auto& c : cells) {
    const std::string key = std::string(model_name(c.model)) + "," +
                            std::string(feature_name(c.feature)) + "," +
                            std::string(label_name(c.label)) + ",";
    for (std::size_t r = 0; r < c.repeats.size(); ++r) {
      const auto& ev = c.repeats[r];
      csv += key + std::to_string(r + 1) + "," + num(ev.model.avg) + "," + num(ev.model.std) +
             "," + num(ev.label.avg) + "," + num(ev.label.std) + "\n";
    }
    csv += key + "mean," + num(c.model_avg()) + "," + num(c.model_std()) + "," +
           num(c.label_avg()) + "," + num(c.label_std()) + "\n";
    std::cout << key << " avg " << num(c.model_avg()) << " (label " << num(c.label_avg()) << ")\n";
  }
  std::vector<fs::path> paths;
  const fs::path p = fs::path(o.out) / "fbp.csv";
  write_text_file(p, csv);
  paths.push_back(p);

  if (o.save_model) {
    if (features.size() != 1 || labels.size() != 1) {
      throw ConfigError("--save-model needs a single --features and --label value");
    }
    const auto samples = build_dataset(in.experiments, outputs, features[0], labels[0]);
    const auto split = split_dataset(samples, protocol.train_fraction, derive_seed(in.seed, "split", 0));
    ForestParams params = protocol.forest;
    params.seed = derive_seed(in.seed, "forest", 0);
    const fs::path m = fs::path(o.out) / "model_rf.json";
    write_text_file(m, train_forest(split.train, params).to_json().dump() + "\n");
    paths.push_back(m);
  }
  return paths;
}

std::vector<fs::path> cmd_sweep(const Options& o, std::uint64_t& seed_out) {
  const Inputs in = resolve_inputs(o);
  seed_out = in.seed;
  const std::vector<int> ms = {3, 4, 5, 6};
  const auto rows = param_sweep(in.experiments, ms, in.config.delta);
  std::string csv = "m,q,avg_m,std_m,seed\n";
  for (const auto& r : rows) {
    char q[32];
    std::snprintf(q, sizeof(q), "%g", r.q);
    csv += std::to_string(r.m) + "," + q + "," + num(r.avg) + "," + num(r.std) + "," +
           std::to_string(in.seed) + "\n";
    std::cout << "(M,q)=(" << r.m << "," << q << "): avg " << num(r.avg) << " m\n";
  }
  const fs::path p = fs::path(o.out) / "sweep.csv";
  write_text_file(p, csv);
  return {p};
}

std::vector<fs::path> cmd_rs_report(const Options& o, std::uint64_t& seed_out) {
  const Inputs in = resolve_inputs(o);
  seed_out = in.seed;
  const FilterConfig filter;
  std::vector<std::vector<PelErrorSample>> per_exp(in.experiments.size());
  parallel_for(in.experiments.size(), [&](std::size_t e) {
    const auto& exp = in.experiments[e];
    for (std::size_t k = 0; k < exp.mp_count(); ++k) {
      const auto pels = generate_pels(exp.snapshots[k], exp.anchors, filter.m);
      const auto s = pel_errors(pels, exp.truths[k]);
      per_exp[e].insert(per_exp[e].end(), s.begin(), s.end());
    }
  });
  std::vector<PelErrorSample> samples;
  for (auto& v : per_exp) samples.insert(samples.end(), v.begin(), v.end());
  const auto boxes = rs_hypothesis_report(samples, o.bins);

  std::string csv =
      "bin,rs_lo_ns,rs_hi_ns,count,q1_m,median_m,q3_m,whisker_lo_m,whisker_hi_m,outliers,seed\n";
  for (const auto& b : boxes) {
    csv += std::to_string(b.bin) + "," + num(b.rs_lo_ns) + "," + num(b.rs_hi_ns) + "," +
           std::to_string(b.count) + "," + num(b.q1) + "," + num(b.median) + "," + num(b.q3) +
           "," + num(b.whisker_lo) + "," + num(b.whisker_hi) + "," + std::to_string(b.outliers) +
           "," + std::to_string(in.seed) + "\n";
  }
  const fs::path p = fs::path(o.out) / "rs_report.csv";
  write_text_file(p, csv);
  std::cout << "wrote " << boxes.size() << " RS bins to " << p.string() << "\n";
  return {p};
}

int dispatch(const Options& o);

int cmd_replay(const Options& o) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(o.manifest));
  } catch (const json::parse_error& e) {
    throw DataError("manifest " + o.manifest + ": " + e.what());
  }
  std::vector<std::string> args;
  try {
    args = manifest.at("argv").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("manifest " + o.manifest + ": " + e.what());
  }
  std::string out = o.out;
  if (out.empty()) out = fs::path(o.manifest).parent_path().string();
  args.emplace_back("--out");
  args.push_back(out);
  return run_cli(args);
}

int dispatch(const Options& o) {
  if (o.command == "replay") return cmd_replay(o);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t seed = 0;
  std::vector<fs::path> outputs;
  if (o.command == "simulate") outputs = cmd_simulate(o, seed);
  else if (o.command == "locate") outputs = cmd_locate(o, seed);
  else if (o.command == "fuse") outputs = cmd_fuse(o, seed);
  else if (o.command == "fbp") outputs = cmd_fbp(o, seed);
  else if (o.command == "sweep") outputs = cmd_sweep(o, seed);
  else if (o.command == "rs-report") outputs = cmd_rs_report(o, seed);
  else throw ConfigError("unknown command " + o.command);
  write_manifest(o, seed, outputs, start);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"cdaloc: combinatorial data augmentation for RTT positioning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", toolkit_version());

  Options o;
  auto common = [&o](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--config", o.config, "Scenario config JSON (defaults when omitted)");
    sub->add_option("--seed", o.seed, "Root seed for every random stream");
    auto* out = sub->add_option("--out", o.out, "Output directory");
    if (needs_out) out->required();
  };
  auto analysis = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--data", o.data,
                    "Directory of simulated experiments (simulates from the config when omitted)");
  };

  auto* sim = app.add_subcommand("simulate", "Generate experiments from a scenario config");
  common(sim);

  auto* locate = app.add_subcommand("locate", "Per-MP positioning without PDR");
  analysis(locate);
  locate->add_option("--method", o.method, "llsrs | cda | lmes | rwgh | all");

  auto* fuse = app.add_subcommand("fuse", "CDA + PDR Kalman fusion");
  analysis(fuse);
  fuse->add_option("--covariance", o.covariance, "updating | deterministic | all");

  auto* fbp = app.add_subcommand("fbp", "Fingerprint positioning with CDA labels");
  analysis(fbp);
  fbp->add_option("--features", o.features, "raw_rtts | all_pels | remaining_pels | all");
  fbp->add_option("--label", o.label, "truth | cda | cda_pdr | all");
  fbp->add_option("--model", o.model, "rf | knn | all");
  fbp->add_option("--repeats", o.repeats, "Random train/test splits");
  fbp->add_option("--trees", o.trees, "Trees per random forest");
  fbp->add_flag("--save-model", o.save_model, "Export the first-split forest as JSON");

  auto* sweep = app.add_subcommand("sweep", "(M, q) parameter sweep");
  analysis(sweep);

  auto* rs = app.add_subcommand("rs-report", "RTT-sum vs PEL error boxplot statistics");
  analysis(rs);
  rs->add_option("--bins", o.bins, "Number of RS quantile bins");

  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", o.manifest, "manifest.json written by a previous run")->required();
  replay->add_option("--out", o.out, "Output directory (defaults to the manifest's)");

  std::vector<const char*> argv{"cdaloc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(o);
  } catch (const ConfigError& e) {
    std::cerr << "cdaloc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cdaloc: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace cdaloc
