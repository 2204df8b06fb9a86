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

#include "graspgen/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "graspgen/errors.hpp"

namespace graspgen {

double FingerSpec::total_length() const {
  double sum = 0.0;
  for (const auto& p : phalanges) sum += p.length_m;
  return sum;
}

int MechanismSpec::joint_count() const {
  int n = 0;
  for (const auto& f : fingers) n += static_cast<int>(f.phalanges.size());
  return n;
}

MechanismSpec compile(const DesignGraph& g, const PhysicalDefaults& defaults) {
  for (const auto& [id, n] : g.nodes()) {
    if (!is_terminal_tag(n.tag)) {
      throw NotTerminal("node " + std::to_string(id) + " (" + std::string(tag_name(n.tag)) +
                        ") is not terminal");
    }
  }
  const GraphCensus census = check_structure(g);
  if (census.fingers.empty()) throw StructureError("design has no fingers");

  constexpr double kDeg = std::numbers::pi / 180.0;
  MechanismSpec spec;
  spec.palm = {defaults.palm_width_m, defaults.palm_thickness_m};
  spec.joint_min_rad = defaults.joint_min_deg * kDeg;
  spec.joint_max_rad = defaults.joint_max_deg * kDeg;

  for (const auto& shape : census.fingers) {
    FingerSpec finger;
    finger.mount = g.node(shape.base).mount;
    finger.pulley_radius_m = defaults.pulley_radius_m;
    // Chain is B J L J L ... J L.
    NodeId cur = shape.base;
    double pending_stiffness = -1.0;
    while (true) {
      const auto kids = g.children(cur);
      if (kids.empty()) break;
      cur = kids.front();
      const Node& n = g.node(cur);
      if (n.tag == NodeTag::kJointT) {
        pending_stiffness = n.value;
      } else if (n.tag == NodeTag::kLinkT) {
        finger.phalanges.push_back(
            {n.value, pending_stiffness, 0.0, defaults.phalanx_thickness_m});
      }
    }
    spec.fingers.push_back(std::move(finger));
  }
  std::stable_sort(spec.fingers.begin(), spec.fingers.end(),
                   [](const FingerSpec& a, const FingerSpec& b) {
                     return std::tuple(a.mount.side, a.mount.offset_m, a.mount.angle_deg) <
                            std::tuple(b.mount.side, b.mount.offset_m, b.mount.angle_deg);
                   });
  return spec;
}

Point2 mount_point(const PalmSpec& palm, const MountTransform& mount) {
  return {mount.offset_m, -0.5 * palm.thickness_m};
}

std::vector<SpecWarning> validate(const MechanismSpec& spec, Point2 workspace_center) {
  std::vector<SpecWarning> out;
  for (std::size_t i = 0; i < spec.fingers.size(); ++i) {
    const FingerSpec& f = spec.fingers[i];
    const Point2 m = mount_point(spec.palm, f.mount);
    const double reach = std::hypot(workspace_center.x - m.x, workspace_center.y - m.y);
    if (f.total_length() < reach) {
      std::ostringstream os;
      os << "finger " << i << " is " << f.total_length() << " m long but the object center is "
         << reach << " m from its mount";
      out.push_back({WarningKind::kUnreachable, static_cast<int>(i), os.str()});
    }
    for (std::size_t j = 0; j < i; ++j) {
      const MountTransform& o = spec.fingers[j].mount;
      if (o.side == f.mount.side && o.offset_m == f.mount.offset_m) {
        std::ostringstream os;
        os << "fingers " << j << " and " << i << " share a mount at offset " << f.mount.offset_m
           << " m on the " << side_name(f.mount.side) << " edge";
        out.push_back({WarningKind::kOverlappingMounts, static_cast<int>(i), os.str()});
      }
    }
  }
  return out;
}

}  // namespace graspgen
