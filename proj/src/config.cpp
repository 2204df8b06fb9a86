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

#include "graspgen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "graspgen/errors.hpp"
#include "json.hpp"

namespace graspgen {

namespace {

using nlohmann::json;

// Reads the keys of one JSON object section, rejecting unknown ones.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: '" + path_ + "." + key + "': " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("config: unknown key '" + path_ + "." + k + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

PalmSide parse_side(const std::string& s, const std::string& path) {
  if (s == "top") return PalmSide::kTop;
  if (s == "bottom") return PalmSide::kBottom;
  throw ConfigError("config: '" + path + "': side must be 'top' or 'bottom'");
}

json object_to_json(const SimObject& o) {
  json j;
  j["name"] = o.name;
  j["mass_kg"] = o.mass_kg;
  j["position_m"] = {o.initial_pose.x, o.initial_pose.y};
  j["theta_rad"] = o.initial_pose.theta;
  switch (o.kind) {
    case ShapeKind::kDisc:
      j["shape"] = "disc";
      j["radius_m"] = o.radius_m;
      break;
    case ShapeKind::kRect:
      j["shape"] = "rect";
      j["width_m"] = o.width_m;
      j["height_m"] = o.height_m;
      break;
    case ShapeKind::kRegularPolygon:
      j["shape"] = "polygon";
      j["sides"] = o.sides;
      j["radius_m"] = o.radius_m;
      break;
  }
  return j;
}

SimObject object_from_json(const json& j, const std::string& path, Point2 center) {
  Section s(j, path);
  SimObject o;
  std::string shape = "disc";
  s.read("name", o.name);
  s.read("shape", shape);
  s.read("mass_kg", o.mass_kg);
  s.read("radius_m", o.radius_m);
  s.read("width_m", o.width_m);
  s.read("height_m", o.height_m);
  s.read("sides", o.sides);
  std::array<double, 2> pos = {center.x, center.y};
  s.read("position_m", pos);
  s.read("theta_rad", o.initial_pose.theta);
  s.finish();
  o.initial_pose.x = pos[0];
  o.initial_pose.y = pos[1];
  if (shape == "disc") {
    o.kind = ShapeKind::kDisc;
  } else if (shape == "rect") {
    o.kind = ShapeKind::kRect;
  } else if (shape == "polygon") {
    o.kind = ShapeKind::kRegularPolygon;
  } else {
    throw ConfigError("config: '" + path + ".shape': unknown shape '" + shape + "'");
  }
  if (o.name.empty()) throw ConfigError("config: '" + path + ".name' must be set");
  o.check();
  return o;
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.reward.objects = default_objects();
  return c;
}

void Config::check() const {
  Grammar(grammar, limits);
  sim.check();
  search.check();
  if (reward.objects.empty()) throw ConfigError("config: no objects");
  if (reward.tension_levels_n.empty()) throw ConfigError("config: no tension levels");
  if (reward.orientations_deg.empty()) throw ConfigError("config: no orientations");
  std::set<std::string> names;
  for (const auto& o : reward.objects) {
    o.check();
    if (!names.insert(o.name).second) throw ConfigError("config: duplicate object '" + o.name + "'");
  }
  for (double t : reward.tension_levels_n) {
    if (!(t >= 0.0)) throw ConfigError("config: tension levels must be non-negative");
  }
  for (double w : reward.weights.w) {
    if (!(w >= 0.0)) throw ConfigError("config: weights must be non-negative");
  }
  if (mechanism.palm_width_m <= 0.0 || mechanism.palm_thickness_m <= 0.0 ||
      mechanism.phalanx_thickness_m <= 0.0 || mechanism.pulley_radius_m <= 0.0 ||
      mechanism.joint_max_deg <= mechanism.joint_min_deg) {
    throw ConfigError("config: bad mechanism dimensions");
  }
  for (double off : grammar.mount_offsets_m) {
    if (std::abs(off) > 0.5 * mechanism.palm_width_m) {
      throw ConfigError("config: mount offset beyond the palm half-width");
    }
  }
}

std::string config_to_json(const Config& c) {
  json j;
  {
    json g;
    g["lengths_m"] = c.grammar.lengths_m;
    g["stiffnesses_nm_per_rad"] = c.grammar.stiffnesses_nm_per_rad;
    g["mount_offsets_m"] = c.grammar.mount_offsets_m;
    g["mount_angles_deg"] = c.grammar.mount_angles_deg;
    json sides = json::array();
    for (PalmSide s : c.grammar.sides) sides.push_back(std::string(side_name(s)));
    g["sides"] = sides;
    g["max_fingers"] = c.limits.max_fingers;
    g["max_phalanges"] = c.limits.max_phalanges;
    g["min_fingers"] = c.limits.min_fingers;
    g["depth_cap"] = c.limits.depth_cap;
    j["grammar"] = g;
  }
  {
    const PhysicalDefaults& m = c.mechanism;
    j["mechanism"] = {{"palm_width_m", m.palm_width_m},
                      {"palm_thickness_m", m.palm_thickness_m},
                      {"phalanx_thickness_m", m.phalanx_thickness_m},
                      {"pulley_radius_m", m.pulley_radius_m},
                      {"joint_min_deg", m.joint_min_deg},
                      {"joint_max_deg", m.joint_max_deg}};
  }
  {
    const SimConfig& s = c.sim;
    json dirs = json::array();
    for (const Vec2& d : s.force_directions) dirs.push_back({d.x(), d.y()});
    j["sim"] = {{"step_s", s.step_s},
                {"t_max_s", s.t_max_s},
                {"t_hold_s", s.t_hold_s},
                {"t_loss_s", s.t_loss_s},
                {"eps_joint_rad_s", s.eps_joint_rad_s},
                {"eps_object_m_s", s.eps_object_m_s},
                {"eps_object_rad_s", s.eps_object_rad_s},
                {"load_factor", s.load_factor},
                {"gravity_m_s2", s.gravity_m_s2},
                {"ramp_s", s.ramp_s},
                {"fail_distance_min_m", s.fail_distance_min_m},
                {"force_directions", dirs},
                {"contact_stiffness_n_m", s.contact_stiffness_n_m},
                {"contact_damping_ns_m", s.contact_damping_ns_m},
                {"friction", s.friction},
                {"tangential_damping_ns_m", s.tangential_damping_ns_m},
                {"joint_damping_nms_rad", s.joint_damping_nms_rad},
                {"object_linear_damping_ns_m", s.object_linear_damping_ns_m},
                {"object_angular_damping_nms_rad", s.object_angular_damping_nms_rad},
                {"trace_decimation", s.trace_decimation}};
  }
  {
    json objects = json::array();
    for (const auto& o : c.reward.objects) objects.push_back(object_to_json(o));
    j["reward"] = {{"weights", c.reward.weights.w},
                   {"tension_levels_n", c.reward.tension_levels_n},
                   {"orientations_deg", c.reward.orientations_deg},
                   {"workspace_center_m", {c.workspace_center.x, c.workspace_center.y}},
                   {"objects", objects}};
  }
  j["search"] = {{"iterations", c.search.iterations},
                 {"exploration_c", c.search.exploration_c},
                 {"seed", c.search.seed},
                 {"top_k", c.search.top_k},
                 {"reward_normalizer", c.search.reward_normalizer},
                 {"backprop", c.search.backprop == Backprop::kMax ? "max" : "mean"},
                 {"memoize", c.search.memoize}};
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

Config config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Config c = Config::defaults();
  Section top(j, "config");
  if (top.has("grammar")) {
    Section g(top.at("grammar"), "grammar");
    g.read("lengths_m", c.grammar.lengths_m);
    g.read("stiffnesses_nm_per_rad", c.grammar.stiffnesses_nm_per_rad);
    g.read("mount_offsets_m", c.grammar.mount_offsets_m);
    g.read("mount_angles_deg", c.grammar.mount_angles_deg);
    if (g.has("sides")) {
      std::vector<std::string> sides;
      g.read("sides", sides);
      c.grammar.sides.clear();
      for (const auto& s : sides) c.grammar.sides.push_back(parse_side(s, g.path("sides")));
    }
    g.read("max_fingers", c.limits.max_fingers);
    g.read("max_phalanges", c.limits.max_phalanges);
    g.read("min_fingers", c.limits.min_fingers);
    g.read("depth_cap", c.limits.depth_cap);
    g.finish();
  }
  if (top.has("mechanism")) {
    Section m(top.at("mechanism"), "mechanism");
    m.read("palm_width_m", c.mechanism.palm_width_m);
    m.read("palm_thickness_m", c.mechanism.palm_thickness_m);
    m.read("phalanx_thickness_m", c.mechanism.phalanx_thickness_m);
    m.read("pulley_radius_m", c.mechanism.pulley_radius_m);
    m.read("joint_min_deg", c.mechanism.joint_min_deg);
    m.read("joint_max_deg", c.mechanism.joint_max_deg);
    m.finish();
  }
  if (top.has("sim")) {
    Section s(top.at("sim"), "sim");
    SimConfig& sc = c.sim;
    s.read("step_s", sc.step_s);
    s.read("t_max_s", sc.t_max_s);
    s.read("t_hold_s", sc.t_hold_s);
    s.read("t_loss_s", sc.t_loss_s);
    s.read("eps_joint_rad_s", sc.eps_joint_rad_s);
    s.read("eps_object_m_s", sc.eps_object_m_s);
    s.read("eps_object_rad_s", sc.eps_object_rad_s);
    s.read("load_factor", sc.load_factor);
    s.read("gravity_m_s2", sc.gravity_m_s2);
    s.read("ramp_s", sc.ramp_s);
    s.read("fail_distance_min_m", sc.fail_distance_min_m);
    if (s.has("force_directions")) {
      std::vector<std::array<double, 2>> dirs;
      s.read("force_directions", dirs);
      sc.force_directions.clear();
      for (const auto& d : dirs) sc.force_directions.emplace_back(d[0], d[1]);
    }
    s.read("contact_stiffness_n_m", sc.contact_stiffness_n_m);
    s.read("contact_damping_ns_m", sc.contact_damping_ns_m);
    s.read("friction", sc.friction);
    s.read("tangential_damping_ns_m", sc.tangential_damping_ns_m);
    s.read("joint_damping_nms_rad", sc.joint_damping_nms_rad);
    s.read("object_linear_damping_ns_m", sc.object_linear_damping_ns_m);
    s.read("object_angular_damping_nms_rad", sc.object_angular_damping_nms_rad);
    s.read("trace_decimation", sc.trace_decimation);
    s.finish();
  }
  if (top.has("reward")) {
    Section r(top.at("reward"), "reward");
    r.read("weights", c.reward.weights.w);
    r.read("tension_levels_n", c.reward.tension_levels_n);
    r.read("orientations_deg", c.reward.orientations_deg);
    if (r.has("workspace_center_m")) {
      std::array<double, 2> wc{};
      r.read("workspace_center_m", wc);
      c.workspace_center = {wc[0], wc[1]};
      // Default objects follow the workspace centre.
      for (auto& o : c.reward.objects) o.initial_pose = {wc[0], wc[1], o.initial_pose.theta};
    }
    if (r.has("objects")) {
      const json& objs = r.at("objects");
      if (!objs.is_array()) throw ConfigError("config: 'reward.objects' must be an array");
      c.reward.objects.clear();
      for (std::size_t i = 0; i < objs.size(); ++i) {
        c.reward.objects.push_back(
            object_from_json(objs[i], "reward.objects[" + std::to_string(i) + "]",
                             c.workspace_center));
      }
    }
    r.finish();
  }
  if (top.has("search")) {
    Section s(top.at("search"), "search");
    s.read("iterations", c.search.iterations);
    s.read("exploration_c", c.search.exploration_c);
    s.read("seed", c.search.seed);
    s.read("top_k", c.search.top_k);
    s.read("reward_normalizer", c.search.reward_normalizer);
    std::string backprop = "max";
    s.read("backprop", backprop);
    if (backprop == "max") {
      c.search.backprop = Backprop::kMax;
    } else if (backprop == "mean") {
      c.search.backprop = Backprop::kMean;
    } else {
      throw ConfigError("config: 'search.backprop' must be 'max' or 'mean'");
    }
    s.read("memoize", c.search.memoize);
    s.finish();
  }
  top.read("output_dir", c.output_dir);
  top.finish();
  c.reward.sim = c.sim;
  c.check();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

const SimObject& find_object(const Config& cfg, const std::string& name) {
  for (const auto& o : cfg.reward.objects) {
    if (o.name == name) return o;
  }
  throw ConfigError("config: no object named '" + name + "'");
}

std::string design_reward_json(const DesignReward& reward, const RewardWeights& weights) {
  json objects = json::object();
  for (const auto& [name, o] : reward.per_object) {
    objects[name] = {{"best_total", o.best_total},
                     {"best_controls_n", o.best_controls},
                     {"breakdown",
                      {{"r1", o.breakdown.r[0]},
                       {"r2", o.breakdown.r[1]},
                       {"r3", o.breakdown.r[2]},
                       {"r4", o.breakdown.r[3]},
                       {"r5", o.breakdown.r[4]},
                       {"r6", o.breakdown.r[5]},
                       {"total", o.breakdown.total}}}};
  }
  json j = {{"final", reward.final},
            {"sim_count", reward.sim_count},
            {"weights", weights.w},
            {"objects", objects}};
  return j.dump(2);
}

}  // namespace graspgen
