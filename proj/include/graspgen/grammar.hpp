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

// Graph grammar for star-topology tendon-driven grippers.
//
// A design graph is a tree rooted at the palm. Each root-to-leaf path is
// either Palm->F (an unused finger slot) or Palm->B->J->(L->J)*->(L|FG),
// where B, J, L may independently be the non-terminal or terminal variant.
// Nine production rules rewrite it:
//
//   R1  initial node -> PalmNT + 6 F           (only via init_graph)
//   R2  F  -> B J FG                           (new finger)
//   R3  FG -> L J FG                           (extra phalanx)
//   R4  PalmNT  -> PalmT
//   R5  BaseNT  -> BaseT(mount)
//   R6  JointNT -> JointT(stiffness)
//   R7  LinkNT  -> LinkT(length)
//   R8  delete F
//   R9  FG -> LinkNT                           (stop growing)

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace graspgen {

enum class NodeTag : std::uint8_t {
  kPalmNT,
  kFingerDummy,
  kBaseNT,
  kJointNT,
  kLinkNT,
  kGrowth,
  kPalmT,
  kBaseT,
  kJointT,
  kLinkT,
};

bool is_terminal_tag(NodeTag tag);
std::string_view tag_name(NodeTag tag);
std::optional<NodeTag> tag_from_name(std::string_view name);

enum class PalmSide : std::uint8_t { kTop, kBottom };

std::string_view side_name(PalmSide side);

// Where a finger base sits on the palm. Angles are kept in degrees so the
// discrete values survive serialization bit-for-bit.
struct MountTransform {
  PalmSide side = PalmSide::kTop;
  double offset_m = 0.0;
  double angle_deg = 0.0;

  double angle_rad() const;
  friend bool operator==(const MountTransform&, const MountTransform&) = default;
};

struct Node {
  NodeTag tag = NodeTag::kPalmNT;
  // Set only for kBaseT.
  MountTransform mount{};
  // Stiffness [N*m/rad] for kJointT, length [m] for kLinkT, else 0.
  double value = 0.0;

  friend bool operator==(const Node&, const Node&) = default;
};

using NodeId = int;

class DesignGraph {
 public:
  DesignGraph() = default;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  // Sorted by (parent, child).
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  NodeId next_id() const { return next_id_; }

  const Node& node(NodeId id) const;
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  std::vector<NodeId> children(NodeId id) const;
  std::optional<NodeId> parent(NodeId id) const;
  // The single palm node. Throws StructureError if there is none.
  NodeId root() const;

  friend bool operator==(const DesignGraph&, const DesignGraph&) = default;

  // Low-level mutation used by the rewriting code and the deserializer.
  // None of these enforce the grammar; check_structure does.
  NodeId add_node(const Node& node);
  void insert_node(NodeId id, const Node& node);
  void remove_node(NodeId id);
  void set_node(NodeId id, const Node& node);
  void add_edge(NodeId parent, NodeId child);
  void set_next_id(NodeId next) { next_id_ = next; }

 private:
  void sort_edges();

  std::map<NodeId, Node> nodes_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  NodeId next_id_ = 0;
};

enum class RuleId : std::uint8_t { R1 = 1, R2, R3, R4, R5, R6, R7, R8, R9 };

struct Action {
  RuleId rule = RuleId::R2;
  NodeId target = -1;
  // Index into the rule's discrete set (mounts for R5, stiffnesses for R6,
  // lengths for R7, 0 for R4). Unused otherwise.
  int param_index = -1;

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;
};

std::string to_string(const Action& action);

struct GrammarLimits {
  int max_fingers = 4;
  int max_phalanges = 5;
  int min_fingers = 1;
  // After this many rule applications only R4-R9 are offered.
  int depth_cap = 30;
};

// Discrete parameter sets for the terminal nodes.
struct GrammarParams {
  std::vector<double> lengths_m = {0.05, 0.08, 0.11};
  std::vector<double> stiffnesses_nm_per_rad = {0.1, 0.3, 0.9};
  std::vector<double> mount_offsets_m = {-0.03, 0.0, 0.03};
  std::vector<double> mount_angles_deg = {-30.0, 0.0, 30.0};
  std::vector<PalmSide> sides = {PalmSide::kTop, PalmSide::kBottom};

  // side-major, then offset, then angle.
  std::vector<MountTransform> mounts() const;
};

class Grammar {
 public:
  Grammar() : Grammar(GrammarParams{}, GrammarLimits{}) {}
  Grammar(GrammarParams params, GrammarLimits limits);

  const GrammarParams& params() const { return params_; }
  const GrammarLimits& limits() const { return limits_; }
  const std::vector<MountTransform>& mounts() const { return mounts_; }

  // Every legal action, ordered by (rule, target, param_index).
  std::vector<Action> applicable_actions(const DesignGraph& g, int applied_count) const;
  // Throws InvalidAction if `a` is not legal for `g`.
  DesignGraph apply(const DesignGraph& g, const Action& a) const;
  bool is_terminal(const DesignGraph& g) const;

 private:
  bool legal(const DesignGraph& g, const Action& a, int applied_count) const;

  GrammarParams params_;
  GrammarLimits limits_;
  std::vector<MountTransform> mounts_;
};

DesignGraph init_graph();

// No non-terminal nodes and a finger count within the limits.
bool is_terminal(const DesignGraph& g, const GrammarLimits& limits = {});

// Per-finger summary of a graph, in palm child order.
struct FingerShape {
  NodeId base = -1;
  // Number of L nodes (terminal or not).
  int links = 0;
  bool growing = false;
};

struct GraphCensus {
  int dummies = 0;
  int non_terminals = 0;
  int growth_points = 0;
  std::vector<FingerShape> fingers;
};

// Throws StructureError if the graph is not a palm-rooted tree whose paths
// all match the finger pattern.
GraphCensus check_structure(const DesignGraph& g);

std::string serialize(const DesignGraph& g);
// Throws ParseError.
DesignGraph deserialize(std::string_view text);

}  // namespace graspgen
