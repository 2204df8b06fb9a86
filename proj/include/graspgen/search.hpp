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

#pragma once

// UCT search over grammar rewrites. Each tree node is a design graph; edges
// are grammar actions. Q on an edge is the best normalised reward of any
// episode that passed through it.

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graspgen/grammar.hpp"
#include "graspgen/mechanism.hpp"
#include "graspgen/reward.hpp"
#include "graspgen/rng.hpp"

namespace graspgen {

struct EpisodeValue {
  double reward = 0.0;
  // Filled by evaluators that simulate.
  std::optional<DesignReward> report;
  bool failed = false;
  std::string error;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // Must be deterministic for a given terminal graph.
  virtual EpisodeValue evaluate(const DesignGraph& g) = 0;
  // Upper bound of the reward, used to map rewards into [0, 1].
  virtual double max_reward() const = 0;
};

// Compiles the graph and scores it on the object set.
class DesignEvaluator : public Evaluator {
 public:
  DesignEvaluator(PhysicalDefaults physical, EvaluationSetup setup, std::uint64_t seed = 0)
      : physical_(physical), setup_(std::move(setup)), seed_(seed) {}

  EpisodeValue evaluate(const DesignGraph& g) override;
  double max_reward() const override {
    return static_cast<double>(setup_.objects.size()) * setup_.weights.sum();
  }

 private:
  PhysicalDefaults physical_;
  EvaluationSetup setup_;
  std::uint64_t seed_;
};

enum class Backprop { kMax, kMean };

struct SearchConfig {
  int iterations = 300;
  double exploration_c = 1.4142135623730951;
  std::uint64_t seed = 0;
  int top_k = 5;
  // <= 0 means use the evaluator's max_reward().
  double reward_normalizer = 0.0;
  Backprop backprop = Backprop::kMax;
  bool memoize = true;

  // Throws ConfigError.
  void check() const;
};

struct SearchNode;

struct SearchEdge {
  Action action;
  std::int64_t n = 0;
  double q = 0.0;
  double sum = 0.0;
  std::unique_ptr<SearchNode> child;
};

struct SearchNode {
  DesignGraph graph;
  // Rules applied since the initial graph.
  int depth = 0;
  std::int64_t n = 0;
  bool terminal = false;
  std::vector<SearchEdge> edges;
};

// Q + C * sqrt(ln(parent_n) / n_a); +infinity for an untried edge.
double ucb_score(double q, std::int64_t edge_n, std::int64_t parent_n, double c);

struct Episode {
  int iteration = 0;
  // Actions from the root to the tree leaf (rollout moves excluded).
  std::vector<Action> path;
  std::string design;
  double reward = 0.0;
  double normalized = 0.0;
  bool failed = false;
};

struct TraceRow {
  int iteration = 0;
  double episode_reward = 0.0;
  double best_reward = 0.0;
  double v_root = 0.0;
  double mean_q = 0.0;
  std::optional<double> test_run_reward;
};

struct RankedDesign {
  DesignGraph graph;
  double reward = 0.0;
  std::optional<DesignReward> report;
  int first_iteration = 0;
};

struct SearchResult {
  std::vector<RankedDesign> top;
  std::vector<TraceRow> trace;
  std::vector<Episode> episodes;
  int evaluations = 0;
  bool interrupted = false;
};

class Mcts {
 public:
  Mcts(const Grammar& grammar, Evaluator& evaluator, const SearchConfig& cfg);

  // One selection / expansion / rollout / backpropagation pass.
  Episode iterate();
  // Greedy descent by Q; the reward if it ends on a terminal design.
  std::optional<double> test_run();

  const SearchNode& root() const { return *root_; }
  double v_root() const;
  double mean_leaf_q() const;
  double best_reward() const { return best_; }
  int evaluations() const { return evaluations_; }
  std::vector<RankedDesign> ranked(int k) const;

 private:
  void expand(SearchNode& node) const;
  EpisodeValue evaluate(const DesignGraph& g, const std::string& key);
  DesignGraph rollout(const SearchNode& leaf);

  const Grammar& grammar_;
  Evaluator& evaluator_;
  SearchConfig cfg_;
  double normalizer_;
  Rng rng_;
  std::unique_ptr<SearchNode> root_;
  std::map<std::string, EpisodeValue> cache_;
  std::map<std::string, RankedDesign> seen_;
  double best_ = 0.0;
  int evaluations_ = 0;
  int iteration_ = 0;
};

using IterationCallback = std::function<void(const TraceRow&)>;

// Runs cfg.iterations iterations (fewer if `stop` becomes true).
SearchResult run_search(const SearchConfig& cfg, const Grammar& grammar, Evaluator& evaluator,
                        const IterationCallback& on_iteration = {},
                        const std::atomic<bool>* stop = nullptr);

std::string trace_header();
std::string format_trace_row(const TraceRow& row);

}  // namespace graspgen
