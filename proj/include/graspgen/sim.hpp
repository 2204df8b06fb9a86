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

// Planar quasi-static grasp simulation.
//
// Fingers are overdamped chains driven by one tendon each: every joint sees
// tension * pulley_radius minus its spring torque. The object is a free
// rigid body with gravity off. Contacts use a penalty law with
// viscous-regularised Coulomb friction. Time stepping is linearly implicit
// Euler on the joint angles and object pose.
//
// World frame: palm centred at the origin, fingers hang towards -y. Fingers
// on the top palm edge close towards -x, those on the bottom edge towards +x.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspgen/geometry.hpp"
#include "graspgen/mechanism.hpp"

namespace graspgen {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

enum class ShapeKind { kDisc, kRect, kRegularPolygon };

struct SimObject {
  std::string name;
  ShapeKind kind = ShapeKind::kDisc;
  // Disc radius, or circumradius for a regular polygon.
  double radius_m = 0.0;
  double width_m = 0.0;
  double height_m = 0.0;
  int sides = 0;
  double mass_kg = 0.1;
  Pose2 initial_pose;

  static SimObject disc(std::string name, double radius, double mass);
  static SimObject rect(std::string name, double width, double height, double mass);
  static SimObject polygon(std::string name, int sides, double circumradius, double mass);

  // Diameter of the circumscribed circle.
  double characteristic_size() const;
  double inertia() const;
  // Shape in its body frame.
  RoundedConvex local_shape() const;
  RoundedConvex shape_at(const Pose2& pose) const;
  // Throws ConfigError on non-positive mass or dimensions.
  void check() const;
};

struct SimConfig {
  double step_s = 1e-3;
  double t_max_s = 5.0;
  double t_hold_s = 0.2;
  double t_loss_s = 0.1;
  double eps_joint_rad_s = 1e-3;
  double eps_object_m_s = 1e-3;
  double eps_object_rad_s = 1e-2;
  double load_factor = 2.0;
  double gravity_m_s2 = 9.81;
  double ramp_s = 1.0;
  double fail_distance_min_m = 0.03;
  std::vector<Vec2> force_directions = {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)};
  double contact_stiffness_n_m = 1e5;
  double contact_damping_ns_m = 50.0;
  double friction = 0.6;
  double tangential_damping_ns_m = 1e4;
  double joint_damping_nms_rad = 0.005;
  double object_linear_damping_ns_m = 0.5;
  double object_angular_damping_nms_rad = 1e-3;
  // Keep every n-th step in the trace samples; 0 disables sampling.
  int trace_decimation = 10;

  // Throws ConfigError.
  void check() const;
};

struct Contact {
  // 0 is the palm, 1.. are phalanges in finger order.
  int body_id = 0;
  Vec2 point = Vec2::Zero();
  // Unit normal from the gripper body into the object.
  Vec2 normal = Vec2::Zero();
  double penetration = 0.0;
  // Force applied to the object.
  Vec2 force = Vec2::Zero();
  double normal_force = 0.0;
  double tangent_force = 0.0;
};

struct PenaltyParams {
  double stiffness = 1e5;
  double damping = 50.0;
  double friction = 0.6;
  double tangential_damping = 200.0;
};

// Fills in the forces of `contacts`. relative_velocity[i] is the velocity of
// the object material point at contact i minus that of the gripper body.
void penalty_forces(std::span<Contact> contacts, std::span<const Vec2> relative_velocity,
                    const PenaltyParams& params);

struct FingerPose {
  // joints[i] is where phalanx i starts; tip is where the last one ends.
  std::vector<Vec2> joints;
  Vec2 tip = Vec2::Zero();
  // Absolute angle of each phalanx.
  std::vector<double> link_angles;

  Segment link(std::size_t i) const;
};

// +1 when positive joint angles rotate the finger counter-clockwise.
double flex_sign(const MountTransform& mount);

// `q` holds every joint angle, finger by finger. Throws DimensionMismatch.
std::vector<FingerPose> forward_kinematics(const MechanismSpec& spec, std::span<const double> q);

std::vector<double> actuation_torques(const FingerSpec& finger, std::span<const double> q,
                                      double tension);

// Geometric contacts (zero force) of every gripper body with the object.
std::vector<Contact> detect_contacts(const MechanismSpec& spec, std::span<const FingerPose> pose,
                                     const SimObject& object, const Pose2& object_pose);

struct TraceSample {
  double t = 0.0;
  Pose2 object_pose;
  std::vector<double> q;
  std::vector<Contact> contacts;
};

struct SimEvents {
  std::optional<double> t_first_contact;
  std::optional<double> t_grasp;
  std::optional<double> t_contact_loss;
  double t_final = 0.0;
};

struct SimTrace {
  SimEvents events;
  double t_max = 0.0;
  std::vector<TraceSample> samples;
  int bodies_total = 0;
  int bodies_contacted = 0;
  std::vector<double> grasp_forces;
  Vec2 contact_centroid_at_grasp = Vec2::Zero();
  Vec2 object_center_at_grasp = Vec2::Zero();
  bool escaped = false;
  // The object overlapped the gripper in its rest pose; nothing was run.
  bool initial_overlap = false;
  // Set when the load stage ran.
  bool load_applied = false;
  double load_displacement = 0.0;
  double fail_distance = 0.0;
  // Equilibrium diagnostics at the grasp event.
  double grasp_torque_residual = 0.0;
  double grasp_object_net_force = 0.0;
  double grasp_max_penetration = 0.0;
  std::int64_t steps = 0;
};

// Two-stage grasp: close the fingers until the object is held still, then
// pull on it along each configured direction and keep the worst outcome.
// `seed` is accepted for interface stability; the solver draws no random
// numbers. Fingers start at their rest angles unless `initial_q` is given.
// Throws Diverged, DimensionMismatch or ConfigError.
SimTrace run_grasp(const MechanismSpec& spec, const SimObject& object,
                   std::span<const double> tensions, const SimConfig& cfg,
                   std::uint64_t seed = 0, std::span<const double> initial_q = {});

// CSV dump of trace samples:
// t,object_x,object_y,object_theta,n_contacts,sum_normal_force
std::string trace_csv(const SimTrace& trace);

}  // namespace graspgen
