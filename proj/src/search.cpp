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

#include "graspgen/search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "graspgen/errors.hpp"

namespace graspgen {

EpisodeValue DesignEvaluator::evaluate(const DesignGraph& g) {
  EpisodeValue v;
  try {
    const MechanismSpec spec = compile(g, physical_);
    DesignReward report = evaluate_design(spec, setup_, seed_);
    v.reward = report.final;
    v.report = std::move(report);
  } catch (const Error& e) {
    v.failed = true;
    v.error = e.what();
  }
  return v;
}

void SearchConfig::check() const {
  if (iterations <= 0) throw ConfigError("search: iterations must be positive");
  if (!(exploration_c >= 0.0)) throw ConfigError("search: exploration_c must be >= 0");
  if (top_k < 0) throw ConfigError("search: top_k must be >= 0");
}

double ucb_score(double q, std::int64_t edge_n, std::int64_t parent_n, double c) {
  if (edge_n == 0) return std::numeric_limits<double>::infinity();
  return q + c * std::sqrt(std::log(static_cast<double>(parent_n)) / static_cast<double>(edge_n));
}

Mcts::Mcts(const Grammar& grammar, Evaluator& evaluator, const SearchConfig& cfg)
    : grammar_(grammar), evaluator_(evaluator), cfg_(cfg), rng_(cfg.seed) {
  cfg_.check();
  normalizer_ = cfg_.reward_normalizer > 0.0 ? cfg_.reward_normalizer : evaluator_.max_reward();
  if (!(normalizer_ > 0.0)) throw ConfigError("search: reward normalizer must be positive");
  root_ = std::make_unique<SearchNode>();
  root_->graph = init_graph();
}

void Mcts::expand(SearchNode& node) const {
  node.terminal = grammar_.is_terminal(node.graph);
  if (node.terminal) return;
  for (const Action& a : grammar_.applicable_actions(node.graph, node.depth)) {
    node.edges.push_back({a, 0, 0.0, 0.0, nullptr});
  }
}

EpisodeValue Mcts::evaluate(const DesignGraph& g, const std::string& key) {
  if (cfg_.memoize) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  EpisodeValue v;
  try {
    v = evaluator_.evaluate(g);
  } catch (const Error& e) {
    v = {};
    v.failed = true;
    v.error = e.what();
  }
  ++evaluations_;
  if (cfg_.memoize) cache_.emplace(key, v);
  return v;
}

DesignGraph Mcts::rollout(const SearchNode& leaf) {
  DesignGraph g = leaf.graph;
  int depth = leaf.depth;
  while (!grammar_.is_terminal(g)) {
    const auto actions = grammar_.applicable_actions(g, depth);
    if (actions.empty()) break;
    g = grammar_.apply(g, actions[rng_.uniform_index(actions.size())]);
    ++depth;
  }
  return g;
}

Episode Mcts::iterate() {
  Episode ep;
  ep.iteration = ++iteration_;
  std::vector<SearchNode*> nodes = {root_.get()};
  std::vector<SearchEdge*> edges;
  // Nodes created or first visited in this pass.
  SearchNode* fresh = nullptr;

  if (root_->n == 0) {
    expand(*root_);
    fresh = root_.get();
  } else {
    SearchNode* node = root_.get();
    while (!node->terminal && !node->edges.empty()) {
      SearchEdge* pick = nullptr;
      double best = -std::numeric_limits<double>::infinity();
      for (SearchEdge& e : node->edges) {
        const double s = ucb_score(e.q, e.n, node->n, cfg_.exploration_c);
        if (s > best) {
          best = s;
          pick = &e;
        }
      }
      edges.push_back(pick);
      ep.path.push_back(pick->action);
      if (!pick->child) {
        pick->child = std::make_unique<SearchNode>();
        pick->child->graph = grammar_.apply(node->graph, pick->action);
        pick->child->depth = node->depth + 1;
        expand(*pick->child);
        fresh = pick->child.get();
        nodes.push_back(fresh);
        break;
      }
      node = pick->child.get();
      nodes.push_back(node);
    }
  }

  SearchNode& leaf = *nodes.back();
  const DesignGraph design = leaf.terminal ? leaf.graph : rollout(leaf);
  ep.design = serialize(design);
  EpisodeValue value;
  if (grammar_.is_terminal(design)) {
    value = evaluate(design, ep.design);
  } else {
    value.failed = true;
    value.error = "rollout ended in a non-terminal graph";
  }
  ep.failed = value.failed;
  ep.reward = value.failed ? 0.0 : value.reward;
  ep.normalized = std::clamp(ep.reward / normalizer_, 0.0, 1.0);

  for (SearchEdge* e : edges) {
    ++e->n;
    e->sum += ep.normalized;
    e->q = cfg_.backprop == Backprop::kMax ? std::max(e->q, ep.normalized)
                                           : e->sum / static_cast<double>(e->n);
  }
  for (SearchNode* n : nodes) {
    // A terminal node keeps its single expansion visit; revisits are
    // counted on the edge that leads to it.
    if (n->terminal && n != fresh) continue;
    ++n->n;
  }

  if (!value.failed) {
    best_ = std::max(best_, ep.reward);
    auto it = seen_.find(ep.design);
    if (it == seen_.end()) {
      seen_.emplace(ep.design, RankedDesign{design, ep.reward, value.report, ep.iteration});
    }
  }
  return ep;
}

std::optional<double> Mcts::test_run() {
  const SearchNode* node = root_.get();
  while (!node->terminal) {
    const SearchEdge* pick = nullptr;
    for (const SearchEdge& e : node->edges) {
      if (e.n == 0 || !e.child) continue;
      if (pick == nullptr || e.q > pick->q) pick = &e;
    }
    if (pick == nullptr) return std::nullopt;
    node = pick->child.get();
  }
  const std::string key = serialize(node->graph);
  auto it = seen_.find(key);
  if (it != seen_.end()) return it->second.reward;
  const EpisodeValue v = evaluate(node->graph, key);
  if (v.failed) return std::nullopt;
  return v.reward;
}

double Mcts::v_root() const {
  double v = 0.0;
  for (const SearchEdge& e : root_->edges) {
    if (e.n > 0) v = std::max(v, e.q);
  }
  return v;
}

double Mcts::mean_leaf_q() const {
  // Mean Q over visited edges whose child has no visited edges of its own.
  double sum = 0.0;
  std::int64_t count = 0;
  std::vector<const SearchNode*> stack = {root_.get()};
  while (!stack.empty()) {
    const SearchNode* node = stack.back();
    stack.pop_back();
    for (const SearchEdge& e : node->edges) {
      if (e.n == 0 || !e.child) continue;
      const bool leaf = std::none_of(e.child->edges.begin(), e.child->edges.end(),
                                     [](const SearchEdge& c) { return c.n > 0; });
      if (leaf) {
        sum += e.q;
        ++count;
      } else {
        stack.push_back(e.child.get());
      }
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<RankedDesign> Mcts::ranked(int k) const {
  std::vector<RankedDesign> all;
  for (const auto& [key, d] : seen_) all.push_back(d);
  std::sort(all.begin(), all.end(), [](const RankedDesign& a, const RankedDesign& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.first_iteration < b.first_iteration;
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

SearchResult run_search(const SearchConfig& cfg, const Grammar& grammar, Evaluator& evaluator,
                        const IterationCallback& on_iteration, const std::atomic<bool>* stop) {
  Mcts mcts(grammar, evaluator, cfg);
  SearchResult result;
  for (int i = 0; i < cfg.iterations; ++i) {
    if (stop != nullptr && stop->load()) {
      result.interrupted = true;
      break;
    }
    Episode ep = mcts.iterate();
    TraceRow row;
    row.iteration = ep.iteration;
    row.episode_reward = ep.reward;
    row.best_reward = mcts.best_reward();
    row.v_root = mcts.v_root();
    row.mean_q = mcts.mean_leaf_q();
    row.test_run_reward = mcts.test_run();
    result.trace.push_back(row);
    result.episodes.push_back(std::move(ep));
    if (on_iteration) on_iteration(row);
  }
  result.top = mcts.ranked(cfg.top_k);
  result.evaluations = mcts.evaluations();
  return result;
}

std::string trace_header() { return "iteration,episode_reward,best_reward,v_root,mean_q,test_run_reward"; }

std::string format_trace_row(const TraceRow& row) {
  std::ostringstream os;
  os.precision(10);
  os << row.iteration << ',' << row.episode_reward << ',' << row.best_reward << ',' << row.v_root
     << ',' << row.mean_q << ',';
  if (row.test_run_reward) os << *row.test_run_reward;
  return os.str();
}

}  // namespace graspgen
