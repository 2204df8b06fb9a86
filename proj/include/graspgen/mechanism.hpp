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

#include <string>
#include <vector>

#include "graspgen/grammar.hpp"

namespace graspgen {

// Fixed physical dimensions not chosen by the grammar.
struct PhysicalDefaults {
  double palm_width_m = 0.08;
  double palm_thickness_m = 0.02;
  double phalanx_thickness_m = 0.01;
  double pulley_radius_m = 0.01;
  double joint_min_deg = 0.0;
  double joint_max_deg = 110.0;
};

struct Phalanx {
  double length_m = 0.0;
  double stiffness_nm_per_rad = 0.0;
  double rest_angle_rad = 0.0;
  double thickness_m = 0.0;
};

struct FingerSpec {
  MountTransform mount;
  // Base to tip; phalanx i hangs off joint i.
  std::vector<Phalanx> phalanges;
  double pulley_radius_m = 0.0;

  double total_length() const;
};

struct PalmSpec {
  double width_m = 0.0;
  double thickness_m = 0.0;
};

struct MechanismSpec {
  PalmSpec palm;
  std::vector<FingerSpec> fingers;
  double joint_min_rad = 0.0;
  double joint_max_rad = 0.0;

  int joint_count() const;
  // Palm plus every phalanx.
  int body_count() const { return 1 + joint_count(); }
};

// Builds the physical gripper for a terminal graph. Fingers are ordered by
// mount side, then offset, then angle.
// Throws NotTerminal or StructureError.
MechanismSpec compile(const DesignGraph& g, const PhysicalDefaults& defaults = {});

// Point in the palm frame where a finger is attached. The palm occupies
// |x| <= width/2, |y| <= thickness/2 and fingers hang below it.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
};
Point2 mount_point(const PalmSpec& palm, const MountTransform& mount);

enum class WarningKind { kUnreachable, kOverlappingMounts };

struct SpecWarning {
  WarningKind kind;
  int finger = -1;
  std::string message;
};

// Cheap geometric sanity checks against the object location.
std::vector<SpecWarning> validate(const MechanismSpec& spec, Point2 workspace_center);

}  // namespace graspgen
