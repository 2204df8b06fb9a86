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

#include "graspgen/grammar.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "graspgen/errors.hpp"
#include "json.hpp"

namespace graspgen {

namespace {

constexpr int kInitialDummies = 6;

bool is_palm(NodeTag t) { return t == NodeTag::kPalmNT || t == NodeTag::kPalmT; }
bool is_base(NodeTag t) { return t == NodeTag::kBaseNT || t == NodeTag::kBaseT; }
bool is_joint(NodeTag t) { return t == NodeTag::kJointNT || t == NodeTag::kJointT; }
bool is_link(NodeTag t) { return t == NodeTag::kLinkNT || t == NodeTag::kLinkT; }

struct TagEntry {
  NodeTag tag;
  std::string_view name;
};

constexpr TagEntry kTagNames[] = {
    {NodeTag::kPalmNT, "PalmNT"}, {NodeTag::kFingerDummy, "F"},
    {NodeTag::kBaseNT, "BaseNT"}, {NodeTag::kJointNT, "JointNT"},
    {NodeTag::kLinkNT, "LinkNT"}, {NodeTag::kGrowth, "FG"},
    {NodeTag::kPalmT, "PalmT"},   {NodeTag::kBaseT, "BaseT"},
    {NodeTag::kJointT, "JointT"}, {NodeTag::kLinkT, "LinkT"},
};

// Walks one finger chain starting at a base node. Throws on any deviation
// from B J (L J)* (L | FG).
FingerShape walk_finger(const DesignGraph& g, NodeId base) {
  FingerShape shape;
  shape.base = base;
  NodeId current = base;
  // Expected kind of the next node: 0 = joint, 1 = link-or-growth.
  int expect = 0;
  while (true) {
    const auto kids = g.children(current);
    if (kids.empty()) {
      const NodeTag t = g.node(current).tag;
      if (!(is_link(t) || t == NodeTag::kGrowth)) {
        throw StructureError("finger at base " + std::to_string(base) +
                             " ends in " + std::string(tag_name(t)));
      }
      return shape;
    }
    if (kids.size() != 1) {
      throw StructureError("node " + std::to_string(current) + " branches inside a finger");
    }
    const NodeId next = kids.front();
    const NodeTag t = g.node(next).tag;
    if (expect == 0) {
      if (!is_joint(t)) {
        throw StructureError("expected a joint at node " + std::to_string(next));
      }
    } else {
      if (t == NodeTag::kGrowth) {
        shape.growing = true;
      } else if (is_link(t)) {
        ++shape.links;
      } else {
        throw StructureError("expected a link or growth point at node " +
                             std::to_string(next));
      }
    }
    expect = 1 - expect;
    current = next;
  }
}

// Finger that contains `id`, as an index into census.fingers.
int finger_of(const DesignGraph& g, const GraphCensus& census, NodeId id) {
  NodeId cur = id;
  while (true) {
    auto p = g.parent(cur);
    if (!p) return -1;
    if (is_palm(g.node(*p).tag)) break;
    cur = *p;
  }
  for (std::size_t i = 0; i < census.fingers.size(); ++i) {
    if (census.fingers[i].base == cur) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

bool is_terminal_tag(NodeTag tag) {
  switch (tag) {
    case NodeTag::kPalmT:
    case NodeTag::kBaseT:
    case NodeTag::kJointT:
    case NodeTag::kLinkT:
      return true;
    default:
      return false;
  }
}

std::string_view tag_name(NodeTag tag) {
  for (const auto& e : kTagNames) {
    if (e.tag == tag) return e.name;
  }
  return "?";
}

std::optional<NodeTag> tag_from_name(std::string_view name) {
  for (const auto& e : kTagNames) {
    if (e.name == name) return e.tag;
  }
  return std::nullopt;
}

std::string_view side_name(PalmSide side) {
  return side == PalmSide::kTop ? "top" : "bottom";
}

double MountTransform::angle_rad() const { return angle_deg * std::numbers::pi / 180.0; }

// ---------------------------------------------------------------------------
// DesignGraph

const Node& DesignGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw StructureError("no node with id " + std::to_string(id));
  return it->second;
}

std::vector<NodeId> DesignGraph::children(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [p, c] : edges_) {
    if (p == id) out.push_back(c);
  }
  return out;
}

std::optional<NodeId> DesignGraph::parent(NodeId id) const {
  for (const auto& [p, c] : edges_) {
    if (c == id) return p;
  }
  return std::nullopt;
}

NodeId DesignGraph::root() const {
  for (const auto& [id, n] : nodes_) {
    if (is_palm(n.tag)) return id;
  }
  throw StructureError("graph has no palm node");
}

NodeId DesignGraph::add_node(const Node& node) {
  const NodeId id = next_id_++;
  nodes_.emplace(id, node);
  return id;
}

void DesignGraph::insert_node(NodeId id, const Node& node) {
  nodes_[id] = node;
  next_id_ = std::max(next_id_, id + 1);
}

void DesignGraph::remove_node(NodeId id) {
  nodes_.erase(id);
  std::erase_if(edges_, [id](const auto& e) { return e.first == id || e.second == id; });
}

void DesignGraph::set_node(NodeId id, const Node& node) { nodes_.at(id) = node; }

void DesignGraph::add_edge(NodeId parent, NodeId child) {
  edges_.emplace_back(parent, child);
  sort_edges();
}

void DesignGraph::sort_edges() { std::sort(edges_.begin(), edges_.end()); }

// ---------------------------------------------------------------------------

std::string to_string(const Action& a) {
  std::ostringstream os;
  os << "R" << static_cast<int>(a.rule);
  if (a.target >= 0) os << "@" << a.target;
  if (a.param_index >= 0) os << "#" << a.param_index;
  return os.str();
}

std::vector<MountTransform> GrammarParams::mounts() const {
  std::vector<MountTransform> out;
  for (PalmSide side : sides) {
    for (double off : mount_offsets_m) {
      for (double ang : mount_angles_deg) out.push_back({side, off, ang});
    }
  }
  return out;
}

DesignGraph init_graph() {
  DesignGraph g;
  const NodeId palm = g.add_node({NodeTag::kPalmNT});
  for (int i = 0; i < kInitialDummies; ++i) {
    g.add_edge(palm, g.add_node({NodeTag::kFingerDummy}));
  }
  return g;
}

GraphCensus check_structure(const DesignGraph& g) {
  GraphCensus census;
  int palms = 0;
  for (const auto& [id, n] : g.nodes()) {
    if (is_palm(n.tag)) ++palms;
    if (!is_terminal_tag(n.tag)) ++census.non_terminals;
    if (n.tag == NodeTag::kGrowth) ++census.growth_points;
    if (id >= g.next_id()) {
      throw StructureError("node id " + std::to_string(id) + " is not below next_id");
    }
  }
  if (palms != 1) {
    throw StructureError("expected exactly one palm node, found " + std::to_string(palms));
  }
  if (g.edges().size() + 1 != g.nodes().size()) {
    throw StructureError("graph is not a tree");
  }
  std::map<NodeId, int> indegree;
  for (const auto& [p, c] : g.edges()) {
    if (!g.contains(p) || !g.contains(c)) throw StructureError("edge refers to a missing node");
    if (++indegree[c] > 1) {
      throw StructureError("node " + std::to_string(c) + " has more than one parent");
    }
  }
  const NodeId root = g.root();
  if (indegree.count(root)) throw StructureError("palm must be the root");
  for (NodeId child : g.children(root)) {
    const NodeTag t = g.node(child).tag;
    if (t == NodeTag::kFingerDummy) {
      if (!g.children(child).empty()) throw StructureError("finger dummy must be a leaf");
      ++census.dummies;
    } else if (is_base(t)) {
      census.fingers.push_back(walk_finger(g, child));
    } else {
      throw StructureError("palm child " + std::to_string(child) + " is " +
                           std::string(tag_name(t)));
    }
  }
  // Every non-palm node must have been reached from the root (no cycles or
  // detached components given the tree edge count above).
  std::size_t reached = 1 + census.dummies;
  for (const auto& f : census.fingers) {
    reached += 1 + 2 * static_cast<std::size_t>(f.links) + (f.growing ? 2 : 0);
  }
  if (reached != g.nodes().size()) throw StructureError("graph has detached nodes");
  return census;
}

bool is_terminal(const DesignGraph& g, const GrammarLimits& limits) {
  for (const auto& [id, n] : g.nodes()) {
    if (!is_terminal_tag(n.tag)) return false;
  }
  const GraphCensus census = check_structure(g);
  const int fingers = static_cast<int>(census.fingers.size());
  return fingers >= limits.min_fingers && fingers <= limits.max_fingers;
}

// ---------------------------------------------------------------------------
// Grammar

Grammar::Grammar(GrammarParams params, GrammarLimits limits)
    : params_(std::move(params)), limits_(limits), mounts_(params_.mounts()) {
  if (limits_.min_fingers < 1 || limits_.max_fingers > kInitialDummies ||
      limits_.min_fingers > limits_.max_fingers || limits_.max_phalanges < 1 ||
      limits_.depth_cap < 0) {
    throw ConfigError("inconsistent grammar limits");
  }
  if (params_.lengths_m.empty() || params_.stiffnesses_nm_per_rad.empty() || mounts_.empty()) {
    throw ConfigError("grammar parameter sets must be non-empty");
  }
}

bool Grammar::is_terminal(const DesignGraph& g) const { return graspgen::is_terminal(g, limits_); }

std::vector<Action> Grammar::applicable_actions(const DesignGraph& g, int applied_count) const {
  const GraphCensus census = check_structure(g);
  const int fingers = static_cast<int>(census.fingers.size());
  const bool capped = applied_count >= limits_.depth_cap;
  // Past the cap a finger may still be added when none could otherwise be
  // completed; without it the graph could never become terminal.
  const bool may_grow = !capped || fingers < limits_.min_fingers;

  std::vector<Action> out;
  auto add_per_target = [&](RuleId rule, NodeTag tag, bool allowed_fn(const DesignGraph&,
                                                                     const GraphCensus&, NodeId,
                                                                     const Grammar&, bool),
                            int params) {
    for (const auto& [id, n] : g.nodes()) {
      if (n.tag != tag) continue;
      if (!allowed_fn(g, census, id, *this, capped)) continue;
      if (params < 0) {
        out.push_back({rule, id, -1});
      } else {
        for (int p = 0; p < params; ++p) out.push_back({rule, id, p});
      }
    }
  };
  auto always = [](const DesignGraph&, const GraphCensus&, NodeId, const Grammar&, bool) {
    return true;
  };

  if (may_grow && fingers < limits_.max_fingers) {
    add_per_target(RuleId::R2, NodeTag::kFingerDummy, always, -1);
  }
  if (!capped) {
    add_per_target(
        RuleId::R3, NodeTag::kGrowth,
        [](const DesignGraph& gg, const GraphCensus& c, NodeId id, const Grammar& gr, bool) {
          const int f = finger_of(gg, c, id);
          // Links after R3: existing + the relabelled growth point + the
          // final link the new growth point must eventually become.
          return f >= 0 && c.fingers[f].links + 2 <= gr.limits().max_phalanges;
        },
        -1);
  }
  add_per_target(RuleId::R4, NodeTag::kPalmNT, always, 1);
  add_per_target(RuleId::R5, NodeTag::kBaseNT, always, static_cast<int>(mounts_.size()));
  add_per_target(RuleId::R6, NodeTag::kJointNT, always,
                 static_cast<int>(params_.stiffnesses_nm_per_rad.size()));
  add_per_target(RuleId::R7, NodeTag::kLinkNT, always, static_cast<int>(params_.lengths_m.size()));
  if (fingers + census.dummies - 1 >= limits_.min_fingers) {
    add_per_target(RuleId::R8, NodeTag::kFingerDummy, always, -1);
  }
  add_per_target(RuleId::R9, NodeTag::kGrowth, always, -1);
  return out;
}

bool Grammar::legal(const DesignGraph& g, const Action& a, int applied_count) const {
  const auto actions = applicable_actions(g, applied_count);
  return std::find(actions.begin(), actions.end(), a) != actions.end();
}

DesignGraph Grammar::apply(const DesignGraph& g, const Action& a) const {
  // Legality is checked without the depth cap: the cap narrows the search,
  // it does not make a rewrite ill-formed.
  if (!legal(g, a, 0) && !legal(g, a, limits_.depth_cap)) {
    throw InvalidAction("action " + to_string(a) + " is not applicable");
  }
  DesignGraph out = g;
  const NodeId t = a.target;
  switch (a.rule) {
    case RuleId::R1:
      throw InvalidAction("R1 is applied only by init_graph");
    case RuleId::R2: {
      const NodeId palm = *g.parent(t);
      out.remove_node(t);
      const NodeId base = out.add_node({NodeTag::kBaseNT});
      const NodeId joint = out.add_node({NodeTag::kJointNT});
      const NodeId grow = out.add_node({NodeTag::kGrowth});
      out.add_edge(palm, base);
      out.add_edge(base, joint);
      out.add_edge(joint, grow);
      break;
    }
    case RuleId::R3: {
      out.set_node(t, {NodeTag::kLinkNT});
      const NodeId joint = out.add_node({NodeTag::kJointNT});
      const NodeId grow = out.add_node({NodeTag::kGrowth});
      out.add_edge(t, joint);
      out.add_edge(joint, grow);
      break;
    }
    case RuleId::R4:
      out.set_node(t, {NodeTag::kPalmT});
      break;
    case RuleId::R5: {
      Node n{NodeTag::kBaseT};
      n.mount = mounts_.at(a.param_index);
      out.set_node(t, n);
      break;
    }
    case RuleId::R6:
      out.set_node(t, {NodeTag::kJointT, {}, params_.stiffnesses_nm_per_rad.at(a.param_index)});
      break;
    case RuleId::R7:
      out.set_node(t, {NodeTag::kLinkT, {}, params_.lengths_m.at(a.param_index)});
      break;
    case RuleId::R8:
      out.remove_node(t);
      break;
    case RuleId::R9:
      out.set_node(t, {NodeTag::kLinkNT});
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const DesignGraph& g) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes()) {
    json j;
    j["id"] = id;
    j["kind"] = std::string(tag_name(n.tag));
    switch (n.tag) {
      case NodeTag::kBaseT:
        j["mount"] = {{"side", std::string(side_name(n.mount.side))},
                      {"offset_m", n.mount.offset_m},
                      {"angle_deg", n.mount.angle_deg}};
        break;
      case NodeTag::kJointT:
        j["stiffness_nm_per_rad"] = n.value;
        break;
      case NodeTag::kLinkT:
        j["length_m"] = n.value;
        break;
      default:
        break;
    }
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& [p, c] : g.edges()) edges.push_back({p, c});
  json doc;
  doc["version"] = 1;
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  // Preserve the id counter only when it differs from the canonical value;
  // ids of deleted nodes would otherwise be reused after a round trip.
  const NodeId canonical_next = g.nodes().empty() ? 0 : g.nodes().rbegin()->first + 1;
  if (g.next_id() != canonical_next) doc["next_id"] = g.next_id();
  return doc.dump();
}

DesignGraph deserialize(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("design graph: ") + e.what());
  }
  auto field_error = [](const std::string& path, const std::string& msg) {
    return ParseError("design graph: field '" + path + "': " + msg);
  };
  if (!doc.is_object()) throw field_error("", "document must be an object");
  if (!doc.contains("version")) throw field_error("version", "missing");
  if (doc["version"] != 1) throw field_error("version", "unsupported version");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw field_error("nodes", "missing");
  if (!doc.contains("edges") || !doc["edges"].is_array()) throw field_error("edges", "missing");

  DesignGraph g;
  const auto& nodes = doc["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    const json& j = nodes[i];
    try {
      const NodeId id = j.at("id").get<int>();
      if (id < 0 || g.contains(id)) throw field_error(path + ".id", "negative or duplicate id");
      const auto tag = tag_from_name(j.at("kind").get<std::string>());
      if (!tag) throw field_error(path + ".kind", "unknown node kind");
      Node n{*tag};
      if (*tag == NodeTag::kBaseT) {
        const json& m = j.at("mount");
        const std::string side = m.at("side").get<std::string>();
        if (side != "top" && side != "bottom") {
          throw field_error(path + ".mount.side", "must be 'top' or 'bottom'");
        }
        n.mount.side = side == "top" ? PalmSide::kTop : PalmSide::kBottom;
        n.mount.offset_m = m.at("offset_m").get<double>();
        n.mount.angle_deg = m.at("angle_deg").get<double>();
      } else if (*tag == NodeTag::kJointT) {
        n.value = j.at("stiffness_nm_per_rad").get<double>();
      } else if (*tag == NodeTag::kLinkT) {
        n.value = j.at("length_m").get<double>();
      }
      g.insert_node(id, n);
    } catch (const json::exception& e) {
      throw field_error(path, e.what());
    }
  }
  const auto& edges = doc["edges"];
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw field_error("edges[" + std::to_string(i) + "]", "expected [parent, child]");
    }
    g.add_edge(e[0].get<int>(), e[1].get<int>());
  }
  if (doc.contains("next_id")) {
    const int next = doc["next_id"].get<int>();
    if (next < g.next_id()) throw field_error("next_id", "below the largest node id");
    g.set_next_id(next);
  }
  try {
    check_structure(g);
  } catch (const StructureError& e) {
    throw ParseError(std::string("design graph: ") + e.what());
  }
  return g;
}

}  // namespace graspgen
