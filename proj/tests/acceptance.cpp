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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graspgen/cli.hpp"
#include "graspgen/config.hpp"
#include "graspgen/grammar.hpp"
#include "graspgen/mechanism.hpp"
#include "graspgen/reward.hpp"
#include "graspgen/rng.hpp"
#include "graspgen/search.hpp"
#include "graspgen/sim.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace graspgen;
using graspgen::testing::make_design;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failures for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 10) failures.push_back(what);
  }
  bool ok() const { return failures.empty(); }
};

int g_failed = 0;

void report(int id, const std::string& title, const Check& c, const std::string& detail) {
  std::printf("%s %d: %s (%s)\n", c.ok() ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  for (const std::string& f : c.failures) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
  if (!c.ok()) ++g_failed;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

void reward_golden() {
  Check c;
  const double v = combine({1.0, 0.31, 0.36, 0.96, 0.77, 0.95}, RewardWeights::decomposition_preset());
  c.expect(std::abs(v - 10.46) <= 1e-9, "decomposition gives " + fmt("%.12f", v));
  const double all = combine({1, 1, 1, 1, 1, 1}, RewardWeights::text_preset());
  c.expect(all == 12.0, "text preset on all ones gives " + fmt("%.12f", all));
  report(1, "reward golden", c, fmt("%.12f", v) + ", " + fmt("%.1f", all));
}

void simulation_count() {
  Check c;
  EvaluationSetup setup;
  setup.objects = default_objects();
  setup.tension_levels_n = {5.0, 10.0, 15.0};
  setup.orientations_deg = {0.0};
  const MountTransform bottom{PalmSide::kBottom, -0.03, -30.0};
  const MountTransform top{PalmSide::kTop, 0.03, -30.0};
  const MountTransform mid{PalmSide::kTop, 0.0, 0.0};
  const auto two = compile(make_design({{bottom, {{0.1, 0.08}}}, {top, {{0.1, 0.08}}}}));
  const auto three = compile(make_design({{bottom, {{0.1, 0.08}}}, {top, {{0.1, 0.08}}}, {mid, {{0.1, 0.05}}}}));
  const auto n2 = evaluate_design(two, setup).sim_count;
  const auto n3 = evaluate_design(three, setup).sim_count;
  c.expect(n2 == 27, "2 fingers ran " + std::to_string(n2));
  c.expect(n3 == 81, "3 fingers ran " + std::to_string(n3));
  report(2, "simulation count", c, std::to_string(n2) + " and " + std::to_string(n3) + " simulations");
}

// ---------------------------------------------------------------------------

char letter(NodeTag t) {
  switch (t) {
    case NodeTag::kBaseT: return 'B';
    case NodeTag::kJointT: return 'J';
    case NodeTag::kLinkT: return 'L';
    default: return '?';
  }
}

void grammar_rollouts() {
  Check c;
  const Grammar grammar;
  const GrammarLimits& lim = grammar.limits();
  const std::regex word("BJ(LJ)*L");
  Rng rng(20240);
  const auto t0 = Clock::now();
  for (int i = 0; i < 10000; ++i) {
    DesignGraph g = init_graph();
    int steps = 0;
    int bound = lim.depth_cap;
    for (;;) {
      if (steps == lim.depth_cap) {
        const GraphCensus census = check_structure(g);
        bound = lim.depth_cap + census.non_terminals + census.growth_points;
      }
      const auto actions = grammar.applicable_actions(g, steps);
      if (actions.empty()) break;
      g = grammar.apply(g, actions[rng.uniform_index(actions.size())]);
      ++steps;
    }
    const std::string tag = "rollout " + std::to_string(i) + ": ";
    c.expect(grammar.is_terminal(g), tag + "not terminal");
    c.expect(steps <= bound, tag + std::to_string(steps) + " steps, bound " + std::to_string(bound));
    GraphCensus census;
    try {
      census = check_structure(g);
    } catch (const std::exception& e) {
      c.expect(false, tag + e.what());
      continue;
    }
    const auto fingers = static_cast<int>(census.fingers.size());
    c.expect(fingers >= 1 && fingers <= 4, tag + std::to_string(fingers) + " fingers");
    for (const FingerShape& f : census.fingers) {
      c.expect(f.links >= 1 && f.links <= 5, tag + std::to_string(f.links) + " phalanges");
    }
    // Star topology: the palm is the only branching node.
    for (NodeId child : g.children(g.root())) {
      std::string w;
      NodeId cur = child;
      for (;;) {
        w.push_back(letter(g.node(cur).tag));
        const auto next = g.children(cur);
        if (next.empty()) break;
        c.expect(next.size() == 1, tag + "branch below the palm");
        cur = next[0];
      }
      c.expect(std::regex_match(w, word), tag + "finger path " + w);
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "took " + fmt("%.2f s", secs));
  report(3, "grammar rollouts", c, "10000 rollouts in " + fmt("%.2f s", secs));
}

// ---------------------------------------------------------------------------

const char* kDeskConfig =
    R"({"grammar":{"max_fingers":2,"max_phalanges":3,"lengths_m":[0.05,0.08],"stiffnesses_nm_per_rad":[0.1]},
        "reward":{"tension_levels_n":[10,15]},"search":{"iterations":300,"seed":1}})";

void physics_invariants() {
  Check c;

  // (a) free finger equilibrium.
  Rng rng(4242);
  double worst_a = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double k = rng.uniform(0.1, 1.0);
    const auto spec = compile(make_design({{{PalmSide::kTop, 0.0, 0.0}, {{k, 0.05}, {k, 0.05}}}}));
    const double rho = spec.fingers[0].pulley_radius_m;
    const double force = rng.uniform(0.0, 0.95 * spec.joint_max_rad * k / rho);
    SimObject far = SimObject::disc("far", 0.03, 0.1);
    far.initial_pose = {1.0, 1.0, 0.0};
    const std::vector<double> t = {force};
    const SimTrace trace = run_grasp(spec, far, t, SimConfig{});
    const double expect = force * rho / k;
    std::size_t j = 0;
    for (const Phalanx& p : spec.fingers[0].phalanges) {
      const double err = std::abs(trace.samples.back().q[j++] - p.rest_angle_rad - expect);
      worst_a = std::max(worst_a, err);
    }
  }
  c.expect(worst_a < 1e-3, "(a) worst angle error " + fmt("%.3g rad", worst_a));

  // (b) every secured event of the desk search.
  const Config cfg = config_from_json(kDeskConfig);
  const Grammar grammar(cfg.grammar, cfg.limits);
  DesignEvaluator evaluator(cfg.mechanism, cfg.reward, cfg.search.seed);
  const SearchResult result = run_search(cfg.search, grammar, evaluator);
  std::set<std::string> designs;
  for (const Episode& e : result.episodes) designs.insert(e.design);
  SimConfig sim = cfg.reward.sim;
  sim.trace_decimation = 0;
  int secured = 0;
  double worst_res = 0.0, worst_pen = 0.0;
  for (const std::string& d : designs) {
    const MechanismSpec spec = compile(deserialize(d), cfg.mechanism);
    double thickness = 1e9;
    for (const auto& f : spec.fingers) {
      for (const auto& p : f.phalanges) thickness = std::min(thickness, p.thickness_m);
    }
    const auto grid = tension_grid(cfg.reward.tension_levels_n, static_cast<int>(spec.fingers.size()));
    for (SimObject o : cfg.reward.objects) {
      const double theta0 = o.initial_pose.theta;
      for (double deg : cfg.reward.orientations_deg) {
        o.initial_pose.theta = theta0 + deg * std::acos(-1.0) / 180.0;
        for (const auto& t : grid) {
          const SimTrace trace = run_grasp(spec, o, t, sim);
          if (!trace.events.t_grasp) continue;
          ++secured;
          worst_res = std::max(worst_res, trace.grasp_torque_residual);
          worst_pen = std::max(worst_pen, trace.grasp_max_penetration / thickness);
          c.expect(trace.grasp_torque_residual < 1e-3,
                   "(b) residual " + fmt("%.3g N m", trace.grasp_torque_residual) + " on " + o.name);
          c.expect(trace.grasp_max_penetration < 0.02 * thickness,
                   "(b) penetration " + fmt("%.3g m", trace.grasp_max_penetration) + " on " + o.name);
        }
      }
    }
  }
  c.expect(secured > 0, "(b) no secured grasps to check");

  // (c) time step halving on the reference grasp.
  const MechanismSpec ref = testing::two_finger_spec();
  const SimObject disc = testing::centred(SimObject::disc("disc", 0.03, 0.1));
  const std::vector<double> t = {10.0, 10.0};
  SimConfig coarse;
  SimConfig fine;
  fine.step_s = coarse.step_s / 2;
  const SimTrace a = run_grasp(ref, disc, t, coarse);
  const SimTrace b = run_grasp(ref, disc, t, fine);
  double change = 1.0;
  if (a.events.t_grasp && b.events.t_grasp) {
    change = std::abs(*a.events.t_grasp - *b.events.t_grasp) / *a.events.t_grasp;
  }
  c.expect(a.events.t_grasp && b.events.t_grasp, "(c) reference grasp not secured");
  c.expect(change < 0.05, "(c) t_grasp changed by " + fmt("%.2f%%", 100 * change));

  report(4, "physics invariants", c,
         "(a) " + fmt("%.2g rad", worst_a) + "; (b) " + std::to_string(secured) + " secured events over " +
             std::to_string(designs.size()) + " designs, residual " + fmt("%.2g N m", worst_res) +
             ", penetration " + fmt("%.2g", 100 * worst_pen) + "% of thickness; (c) " +
             fmt("%.2f%%", 100 * change));
}

// ---------------------------------------------------------------------------

int phalanx_count(const DesignGraph& g) {
  int n = 0;
  for (const auto& [id, node] : g.nodes()) n += node.tag == NodeTag::kLinkT;
  return n;
}

class PhalanxEvaluator : public Evaluator {
 public:
  explicit PhalanxEvaluator(int cap) : cap_(cap) {}
  EpisodeValue evaluate(const DesignGraph& g) override {
    EpisodeValue v;
    v.reward = std::min(phalanx_count(g), cap_);
    return v;
  }
  double max_reward() const override { return cap_; }

 private:
  int cap_;
};

void walk(const SearchNode& node, const std::function<void(const SearchNode&)>& fn) {
  fn(node);
  for (const SearchEdge& e : node.edges) {
    if (e.child) walk(*e.child, fn);
  }
}

void mcts_statistics() {
  Check c;
  const int n = 400;
  const Grammar grammar;
  PhalanxEvaluator eval(20);
  SearchConfig cfg;
  cfg.seed = 5;
  Mcts mcts(grammar, eval, cfg);
  std::vector<Episode> episodes;
  double best = 0.0, v = 0.0;
  for (int i = 0; i < n; ++i) {
    episodes.push_back(mcts.iterate());
    mcts.test_run();
    c.expect(mcts.best_reward() >= best, "best decreased at " + std::to_string(i + 1));
    c.expect(mcts.v_root() >= v, "V(root) decreased at " + std::to_string(i + 1));
    best = mcts.best_reward();
    v = mcts.v_root();
  }
  c.expect(mcts.root().n == n, "root.n = " + std::to_string(mcts.root().n));
  int nodes = 0;
  walk(mcts.root(), [&](const SearchNode& node) {
    ++nodes;
    std::int64_t sum = 0;
    for (const SearchEdge& e : node.edges) sum += e.n;
    c.expect(node.n == sum + 1, "node at depth " + std::to_string(node.depth) + " has n " +
                                    std::to_string(node.n) + ", children " + std::to_string(sum));
  });
  std::map<const SearchEdge*, double> max_q;
  for (const Episode& ep : episodes) {
    const SearchNode* node = &mcts.root();
    for (const Action& a : ep.path) {
      const SearchEdge* edge = nullptr;
      for (const SearchEdge& e : node->edges) {
        if (e.action == a) edge = &e;
      }
      if (!edge || !edge->child) {
        c.expect(false, "episode path leaves the tree");
        break;
      }
      max_q[edge] = std::max(max_q[edge], ep.normalized);
      node = edge->child.get();
    }
  }
  walk(mcts.root(), [&](const SearchNode& node) {
    for (const SearchEdge& e : node.edges) {
      if (e.n > 0) c.expect(e.q == max_q[&e], "edge Q differs from its episode log");
    }
  });

  // Toy optimum on the desk-sized space.
  GrammarLimits small;
  small.max_fingers = 2;
  small.max_phalanges = 3;
  const Grammar toy(GrammarParams{}, small);
  const int optimum = small.max_fingers * small.max_phalanges;
  const auto t0 = Clock::now();
  int reached = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PhalanxEvaluator e(optimum);
    SearchConfig sc;
    sc.iterations = 500;
    sc.seed = seed;
    const SearchResult r = run_search(sc, toy, e);
    reached += r.trace.back().best_reward == optimum;
  }
  const double secs = seconds_since(t0);
  c.expect(reached == 5, "toy optimum reached for " + std::to_string(reached) + " of 5 seeds");
  c.expect(secs < 60.0, "toy searches took " + fmt("%.1f s", secs));

  // Full space, reported only.
  PhalanxEvaluator full_eval(20);
  SearchConfig fc;
  fc.iterations = 500;
  fc.seed = 1;
  const SearchResult full = run_search(fc, grammar, full_eval);
  std::printf("INFO: full space (4 fingers x 5 phalanges, optimum 20): best %g after 500 iterations\n",
              full.trace.back().best_reward);

  report(5, "search statistics", c,
         std::to_string(nodes) + " nodes checked; toy optimum " + std::to_string(optimum) + " on " +
             std::to_string(reached) + "/5 seeds in " + fmt("%.1f s", secs));
}

// ---------------------------------------------------------------------------

int search_cli(const fs::path& cfg, const fs::path& out) {
  std::ostringstream o, e;
  const int code = run_cli({"search", "--config", cfg.string(), "--out", out.string()}, o, e);
  if (code != 0) std::printf("    search exited %d: %s\n", code, e.str().c_str());
  return code;
}

void desk_experiment(const fs::path& dir) {
  Check c;
  const auto t0 = Clock::now();
  c.expect(search_cli(dir / "desk.json", dir / "run_a") == 0, "search failed");
  const double secs = seconds_since(t0);
  c.expect(secs < 1800.0, "took " + fmt("%.0f s", secs));
  int held = 0;
  double best_r6 = 0.0;
  std::string detail;
  if (fs::exists(dir / "run_a/designs/design_1.report.json")) {
    const json rep = json::parse(read(dir / "run_a/designs/design_1.report.json"));
    for (const auto& [name, obj] : rep["evaluation"]["objects"].items()) {
      const double r1 = obj["breakdown"]["r1"];
      const double r6 = obj["breakdown"]["r6"];
      held += r1 == 1.0;
      best_r6 = std::max(best_r6, r6);
      detail += name + " r1=" + fmt("%.2f", r1) + " r6=" + fmt("%.2f", r6) + "; ";
    }
  } else {
    c.expect(false, "no top design written");
  }
  c.expect(held >= 2, "secured " + std::to_string(held) + " of 3 objects");
  c.expect(best_r6 > 0.5, "best r6 " + fmt("%.3f", best_r6));
  report(6, "desk experiment", c, detail + fmt("%.1f s", secs));
}

void determinism(const fs::path& dir) {
  Check c;
  c.expect(search_cli(dir / "desk.json", dir / "run_b") == 0, "second search failed");
  c.expect(read(dir / "run_a/trace.csv") == read(dir / "run_b/trace.csv"), "trace.csv differs");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "run_a/designs")) {
    const fs::path other = dir / "run_b/designs" / e.path().filename();
    c.expect(fs::exists(other) && read(e.path()) == read(other), e.path().filename().string() + " differs");
    ++files;
  }
  int other_files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "run_b/designs")) ++other_files;
  c.expect(files == other_files, "design file counts differ");
  c.expect(files > 0, "no design files");
  report(7, "determinism", c, "trace.csv and " + std::to_string(files) + " design files compared");
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "graspgen_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "desk.json") << kDeskConfig;

  const std::vector<std::function<void()>> criteria = {
      reward_golden, simulation_count, grammar_rollouts, physics_invariants, mcts_statistics,
      [&] { desk_experiment(dir); }, [&] { determinism(dir); },
  };
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      Check c;
      c.expect(false, e.what());
      report(static_cast<int>(i + 1), "criterion", c, "threw");
    }
  }
  fs::remove_all(dir);
  std::printf("%d of %zu criteria failed\n", g_failed, criteria.size());
  return g_failed == 0 ? 0 : 1;
}
