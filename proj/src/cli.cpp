// Copyright 2026 The graspgen Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "graspgen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "graspgen/config.hpp"
#include "graspgen/errors.hpp"
#include "graspgen/render.hpp"
#include "json.hpp"

namespace graspgen {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

// Accepts a config file or a run_meta.json written by a previous search.
Config read_config(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.is_object() && j.contains("graspgen_version") && j.contains("config")) {
    return config_from_json(j.at("config").dump());
  }
  return config_from_json(text);
}

Config config_or_defaults(const std::string& path) {
  Config c = path.empty() ? Config::defaults() : read_config(path);
  c.reward.sim = c.sim;
  if (const char* env = std::getenv("GRASPGEN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw ConfigError("GRASPGEN_THREADS must be a positive integer");
    }
    c.reward.threads = static_cast<int>(n);
  }
  return c;
}

DesignGraph read_design(const std::string& path) {
  try {
    return deserialize(read_file(path));
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<double> parse_csv(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad tension value '" + item + "'");
    }
  }
  return out;
}

int cmd_search(const std::string& config_path, std::string out_dir,
               std::optional<std::uint64_t> seed, std::optional<int> iterations,
               std::ostream& err) {
  Config cfg = config_or_defaults(config_path);
  if (seed) cfg.search.seed = *seed;
  if (iterations) cfg.search.iterations = *iterations;
  cfg.search.check();
  if (out_dir.empty()) out_dir = cfg.output_dir;

  const fs::path out(out_dir);
  fs::create_directories(out / "designs");

  json meta;
  meta["graspgen_version"] = kVersion;
  meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION);
  meta["nlohmann_json_version"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  meta["seed"] = cfg.search.seed;
  meta["iterations"] = cfg.search.iterations;
  meta["config"] = json::parse(config_to_json(cfg));
  write_file(out / "run_meta.json", meta.dump(2) + "\n");

  std::ofstream trace(out / "trace.csv", std::ios::binary);
  if (!trace) throw Error("cannot write '" + (out / "trace.csv").string() + "'");
  trace << trace_header() << '\n';
  trace.flush();

  const Grammar grammar(cfg.grammar, cfg.limits);
  DesignEvaluator evaluator(cfg.mechanism, cfg.reward, cfg.search.seed);

  g_stop.store(false);
  auto previous = std::signal(SIGINT, on_sigint);
  SearchResult result;
  try {
    result = run_search(
        cfg.search, grammar, evaluator,
        [&](const TraceRow& row) {
          trace << format_trace_row(row) << '\n';
          trace.flush();
        },
        &g_stop);
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);

  for (std::size_t i = 0; i < result.top.size(); ++i) {
    const RankedDesign& d = result.top[i];
    const std::string stem = "design_" + std::to_string(i + 1);
    write_file(out / "designs" / (stem + ".json"), serialize(d.graph));
    json report;
    report["rank"] = i + 1;
    report["reward"] = d.reward;
    report["first_iteration"] = d.first_iteration;
    if (d.report) report["evaluation"] = json::parse(design_reward_json(*d.report, cfg.reward.weights));
    write_file(out / "designs" / (stem + ".report.json"), report.dump(2) + "\n");
  }
  if (result.interrupted) {
    err << "interrupted after " << result.trace.size() << " iterations\n";
    return kExitInterrupted;
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& design_path, const std::string& config_path,
                 std::ostream& out) {
  const Config cfg = config_or_defaults(config_path);
  const DesignGraph g = read_design(design_path);
  const MechanismSpec spec = compile(g, cfg.mechanism);
  const DesignReward report = evaluate_design(spec, cfg.reward);
  out << design_reward_json(report, cfg.reward.weights) << '\n';
  return kExitOk;
}

int cmd_render(const std::string& design_path, const std::string& config_path,
               const std::string& object_name, const std::string& tension_csv,
               double orientation_deg, double interval_s, const std::string& out_dir,
               std::ostream& out) {
  const Config cfg = config_or_defaults(config_path);
  const DesignGraph g = read_design(design_path);
  const MechanismSpec spec = compile(g, cfg.mechanism);
  SimObject object = find_object(cfg, object_name);
  object.initial_pose.theta += orientation_deg * std::numbers::pi / 180.0;
  const std::vector<double> tensions = parse_csv(tension_csv);
  if (tensions.size() != spec.fingers.size()) {
    throw ConfigError("design has " + std::to_string(spec.fingers.size()) + " fingers but " +
                      std::to_string(tensions.size()) + " tensions were given");
  }
  RenderOptions opts;
  opts.frame_interval_s = interval_s;
  const SimTrace trace = render_grasp(spec, object, tensions, cfg.sim, opts, out_dir);
  out << trace.samples.size() << " frames written to " << out_dir << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grammar-guided tree search for underactuated gripper designs", "graspgen"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int iterations = 0;
  auto* search = app.add_subcommand("search", "Run a design search");
  search->add_option("--config", config_path, "Config file or run_meta.json")->required();
  search->add_option("--out", out_dir, "Output directory");
  auto* seed_opt = search->add_option("--seed", seed, "Search seed");
  auto* iter_opt = search->add_option("--iterations", iterations, "Iteration budget");

  std::string design_path;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate one design");
  evaluate->add_option("--design", design_path, "Design file")->required();
  evaluate->add_option("--config", config_path, "Config file");

  std::string object_name;
  std::string tensions;
  double orientation_deg = 0.0;
  double interval_s = 0.05;
  auto* render = app.add_subcommand("render", "Render a grasp as SVG frames");
  render->add_option("--design", design_path, "Design file")->required();
  render->add_option("--object", object_name, "Object name from the config")->required();
  render->add_option("--tension", tensions, "Tendon tensions in N, one per finger")->required();
  render->add_option("--out", out_dir, "Output directory")->required();
  render->add_option("--config", config_path, "Config file");
  render->add_option("--orientation-deg", orientation_deg, "Object rotation");
  render->add_option("--interval", interval_s, "Seconds between frames");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*search) {
      std::optional<std::uint64_t> s;
      std::optional<int> n;
      if (*seed_opt) s = seed;
      if (*iter_opt) n = iterations;
      return cmd_search(config_path, out_dir, s, n, err);
    }
    if (*evaluate) return cmd_evaluate(design_path, config_path, out);
    return cmd_render(design_path, config_path, object_name, tensions, orientation_deg,
                      interval_s, out_dir, out);
  } catch (const NotTerminal& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotTerminal;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StructureError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace graspgen
