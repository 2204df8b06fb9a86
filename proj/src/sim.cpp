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

#include "graspgen/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "graspgen/errors.hpp"

namespace graspgen {

// ---------------------------------------------------------------------------
// Objects

SimObject SimObject::disc(std::string name, double radius, double mass) {
  SimObject o;
  o.name = std::move(name);
  o.kind = ShapeKind::kDisc;
  o.radius_m = radius;
  o.mass_kg = mass;
  return o;
}

SimObject SimObject::rect(std::string name, double width, double height, double mass) {
  SimObject o;
  o.name = std::move(name);
  o.kind = ShapeKind::kRect;
  o.width_m = width;
  o.height_m = height;
  o.mass_kg = mass;
  return o;
}

SimObject SimObject::polygon(std::string name, int sides, double circumradius, double mass) {
  SimObject o;
  o.name = std::move(name);
  o.kind = ShapeKind::kRegularPolygon;
  o.sides = sides;
  o.radius_m = circumradius;
  o.mass_kg = mass;
  return o;
}

double SimObject::characteristic_size() const {
  switch (kind) {
    case ShapeKind::kDisc:
    case ShapeKind::kRegularPolygon:
      return 2.0 * radius_m;
    case ShapeKind::kRect:
      return std::hypot(width_m, height_m);
  }
  return 0.0;
}

double SimObject::inertia() const {
  switch (kind) {
    case ShapeKind::kDisc:
      return 0.5 * mass_kg * radius_m * radius_m;
    case ShapeKind::kRect:
      return mass_kg * (width_m * width_m + height_m * height_m) / 12.0;
    case ShapeKind::kRegularPolygon:
      return mass_kg * radius_m * radius_m / 6.0 *
             (2.0 + std::cos(2.0 * std::numbers::pi / sides));
  }
  return 0.0;
}

RoundedConvex SimObject::local_shape() const {
  RoundedConvex s;
  switch (kind) {
    case ShapeKind::kDisc:
      s.core = {Vec2::Zero()};
      s.radius = radius_m;
      break;
    case ShapeKind::kRect: {
      const double hx = 0.5 * width_m;
      const double hy = 0.5 * height_m;
      s.core = {Vec2(-hx, -hy), Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy)};
      break;
    }
    case ShapeKind::kRegularPolygon:
      for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * std::numbers::pi * i / sides;
        s.core.emplace_back(radius_m * std::cos(a), radius_m * std::sin(a));
      }
      break;
  }
  return s;
}

RoundedConvex SimObject::shape_at(const Pose2& pose) const {
  RoundedConvex s = local_shape();
  const Eigen::Rotation2Dd rot(pose.theta);
  const Vec2 c(pose.x, pose.y);
  for (Vec2& v : s.core) v = c + rot * v;
  return s;
}

void SimObject::check() const {
  if (!(mass_kg > 0.0)) throw ConfigError("object '" + name + "': mass must be positive");
  bool ok = true;
  switch (kind) {
    case ShapeKind::kDisc:
      ok = radius_m > 0.0;
      break;
    case ShapeKind::kRect:
      ok = width_m > 0.0 && height_m > 0.0;
      break;
    case ShapeKind::kRegularPolygon:
      ok = radius_m > 0.0 && sides >= 3;
      break;
  }
  if (!ok) throw ConfigError("object '" + name + "': dimensions must be positive");
}

void SimConfig::check() const {
  if (!(step_s > 0.0) || !(t_max_s > step_s)) throw ConfigError("sim: bad step or t_max");
  if (t_hold_s < 0.0 || t_loss_s < 0.0 || ramp_s <= 0.0) throw ConfigError("sim: bad durations");
  if (contact_stiffness_n_m <= 0.0 || contact_damping_ns_m < 0.0 || friction < 0.0 ||
      tangential_damping_ns_m < 0.0) {
    throw ConfigError("sim: bad contact parameters");
  }
  if (joint_damping_nms_rad <= 0.0) throw ConfigError("sim: joint damping must be positive");
  if (object_linear_damping_ns_m < 0.0 || object_angular_damping_nms_rad < 0.0) {
    throw ConfigError("sim: object damping must be non-negative");
  }
  if (force_directions.empty()) throw ConfigError("sim: no load directions");
  for (const Vec2& d : force_directions) {
    if (!(d.norm() > 0.0)) throw ConfigError("sim: zero load direction");
  }
  if (trace_decimation < 0) throw ConfigError("sim: negative trace decimation");
}

// ---------------------------------------------------------------------------
// Contact forces

void penalty_forces(std::span<Contact> contacts, std::span<const Vec2> relative_velocity,
                    const PenaltyParams& params) {
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    Contact& c = contacts[i];
    const Vec2& v = relative_velocity[i];
    const double rate = -c.normal.dot(v);
    const double fn = std::max(0.0, params.stiffness * c.penetration + params.damping * rate);
    const Vec2 t = perp(c.normal);
    const double vt = t.dot(v);
    const double ft = -std::copysign(std::min(params.friction * fn,
                                              params.tangential_damping * std::abs(vt)),
                                     vt);
    c.normal_force = fn;
    c.tangent_force = ft;
    c.force = fn * c.normal + ft * t;
  }
}

// ---------------------------------------------------------------------------
// Kinematics

Segment FingerPose::link(std::size_t i) const {
  return {joints[i], i + 1 < joints.size() ? joints[i + 1] : tip};
}

double flex_sign(const MountTransform& mount) {
  return mount.side == PalmSide::kTop ? -1.0 : 1.0;
}

std::vector<FingerPose> forward_kinematics(const MechanismSpec& spec, std::span<const double> q) {
  if (static_cast<int>(q.size()) != spec.joint_count()) {
    throw DimensionMismatch("expected " + std::to_string(spec.joint_count()) +
                            " joint angles, got " + std::to_string(q.size()));
  }
  std::vector<FingerPose> out;
  out.reserve(spec.fingers.size());
  std::size_t k = 0;
  for (const FingerSpec& f : spec.fingers) {
    const double s = flex_sign(f.mount);
    const Point2 m = mount_point(spec.palm, f.mount);
    FingerPose pose;
    Vec2 p(m.x, m.y);
    double angle = -0.5 * std::numbers::pi + s * f.mount.angle_rad();
    for (const Phalanx& ph : f.phalanges) {
      angle += s * q[k++];
      pose.joints.push_back(p);
      pose.link_angles.push_back(angle);
      p += ph.length_m * Vec2(std::cos(angle), std::sin(angle));
    }
    pose.tip = p;
    out.push_back(std::move(pose));
  }
  return out;
}

std::vector<double> actuation_torques(const FingerSpec& finger, std::span<const double> q,
                                      double tension) {
  if (q.size() != finger.phalanges.size()) {
    throw DimensionMismatch("joint angle count does not match the finger");
  }
  std::vector<double> tau(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Phalanx& p = finger.phalanges[i];
    tau[i] = tension * finger.pulley_radius_m - p.stiffness_nm_per_rad * (q[i] - p.rest_angle_rad);
  }
  return tau;
}

namespace {

RoundedConvex palm_shape(const PalmSpec& palm) {
  const double hx = 0.5 * palm.width_m;
  const double hy = 0.5 * palm.thickness_m;
  return {{Vec2(-hx, -hy), Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy)}, 0.0};
}

}  // namespace

std::vector<Contact> detect_contacts(const MechanismSpec& spec, std::span<const FingerPose> pose,
                                     const SimObject& object, const Pose2& object_pose) {
  const RoundedConvex obj = object.shape_at(object_pose);
  std::vector<Contact> out;
  auto add = [&](int body, const RoundedConvex& shape) {
    auto prox = proximity(shape, obj);
    if (!prox || prox->penetration <= 0.0) return;
    Contact c;
    c.body_id = body;
    c.point = prox->point;
    c.normal = prox->normal;
    c.penetration = prox->penetration;
    out.push_back(c);
  };
  add(0, palm_shape(spec.palm));
  int body = 1;
  for (std::size_t f = 0; f < spec.fingers.size(); ++f) {
    const FingerSpec& fs = spec.fingers[f];
    for (std::size_t i = 0; i < fs.phalanges.size(); ++i) {
      const Segment s = pose[f].link(i);
      add(body++, {{s.a, s.b}, 0.5 * fs.phalanges[i].thickness_m});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stepper

namespace {

struct BodyRef {
  int finger = -1;
  int link = -1;
  // Global index of the finger's first joint.
  int first_joint = 0;
};

class Stepper {
 public:
  Stepper(const MechanismSpec& spec, const SimObject& object, std::span<const double> tensions,
          const SimConfig& cfg, std::span<const double> initial_q)
      : spec_(spec), object_(object), cfg_(cfg), tensions_(tensions.begin(), tensions.end()) {
    nq_ = spec.joint_count();
    n_ = nq_ + 3;
    bodies_.push_back({});
    int first = 0;
    for (std::size_t f = 0; f < spec.fingers.size(); ++f) {
      for (std::size_t i = 0; i < spec.fingers[f].phalanges.size(); ++i) {
        bodies_.push_back({static_cast<int>(f), static_cast<int>(i), first});
      }
      first += static_cast<int>(spec.fingers[f].phalanges.size());
    }
    q_.assign(nq_, 0.0);
    k_ = 0;
    for (const auto& f : spec.fingers) {
      for (const auto& p : f.phalanges) q_[k_++] = p.rest_angle_rad;
    }
    if (!initial_q.empty()) q_.assign(initial_q.begin(), initial_q.end());
    u_ = Eigen::VectorXd::Zero(n_);
    pose_ = object.initial_pose;
    mass_ = Eigen::Vector3d(object.mass_kg, object.mass_kg, object.inertia());
    damping_ = Eigen::Vector3d(cfg.object_linear_damping_ns_m, cfg.object_linear_damping_ns_m,
                               cfg.object_angular_damping_nms_rad);
    penalty_ = {cfg.contact_stiffness_n_m, cfg.contact_damping_ns_m, cfg.friction,
                cfg.tangential_damping_ns_m};
    pinned_.assign(nq_, false);
    refresh();
  }

  // Recomputes kinematics, contacts and contact forces for the current state.
  void refresh() {
    fingers_ = forward_kinematics(spec_, q_);
    contacts_ = detect_contacts(spec_, fingers_, object_, pose_);
    jacobians_.clear();
    std::vector<Vec2> vrel;
    for (const Contact& c : contacts_) {
      jacobians_.push_back(contact_jacobian(c));
      vrel.push_back(jacobians_.back() * u_);
    }
    penalty_forces(contacts_, vrel, penalty_);
  }

  // One linearly implicit Euler step under external object force `load`.
  void step(const Vec2& load, std::int64_t index) {
    const double h = cfg_.step_s;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);

    int j = 0;
    for (std::size_t f = 0; f < spec_.fingers.size(); ++f) {
      const FingerSpec& fs = spec_.fingers[f];
      const double drive = tensions_[f] * fs.pulley_radius_m;
      for (const Phalanx& p : fs.phalanges) {
        a(j, j) += cfg_.joint_damping_nms_rad + h * p.stiffness_nm_per_rad;
        b(j) += drive - p.stiffness_nm_per_rad * (q_[j] - p.rest_angle_rad);
        ++j;
      }
    }
    for (int d = 0; d < 3; ++d) {
      a(nq_ + d, nq_ + d) += mass_(d) / h + damping_(d);
      b(nq_ + d) += mass_(d) * u_(nq_ + d) / h;
    }
    b(nq_) += load.x();
    b(nq_ + 1) += load.y();

    // Normal and tangential laws are linearised for every penetrating
    // contact. Contacts that would pull are dropped; tangential forces
    // beyond the friction cone switch to sliding at mu times the normal force.
    enum Mode : char { kOff, kStick, kSlideNeg, kSlidePos };
    std::vector<Eigen::RowVectorXd> gn(contacts_.size());
    std::vector<Eigen::RowVectorXd> gt(contacts_.size());
    std::vector<char> mode(contacts_.size(), kOff);
    for (std::size_t i = 0; i < contacts_.size(); ++i) {
      const Contact& c = contacts_[i];
      gn[i] = c.normal.transpose() * jacobians_[i];
      gt[i] = perp(c.normal).transpose() * jacobians_[i];
      if (c.penetration > 0.0) mode[i] = kStick;
    }

    const double kn = h * penalty_.stiffness + penalty_.damping;
    const double ct = penalty_.tangential_damping;
    const double mu = penalty_.friction;
    Eigen::VectorXd u;
    for (std::size_t round = 0; round <= 3 * contacts_.size(); ++round) {
      Eigen::MatrixXd ar = a;
      Eigen::VectorXd br = b;
      for (std::size_t i = 0; i < contacts_.size(); ++i) {
        if (mode[i] == kOff) continue;
        const double push = penalty_.stiffness * contacts_[i].penetration;
        ar += kn * gn[i].transpose() * gn[i];
        br += gn[i].transpose() * push;
        if (mode[i] == kStick) {
          ar += ct * gt[i].transpose() * gt[i];
        } else {
          const double s = mode[i] == kSlidePos ? mu : -mu;
          ar += s * kn * gt[i].transpose() * gn[i];
          br += gt[i].transpose() * (s * push);
        }
      }
      u = solve_with_limits(ar, br);
      bool changed = false;
      for (std::size_t i = 0; i < contacts_.size(); ++i) {
        if (mode[i] == kOff) continue;
        const double fn = penalty_.stiffness * contacts_[i].penetration - kn * gn[i].dot(u);
        const double vt = gt[i].dot(u);
        char next = mode[i];
        if (fn < 0.0) {
          next = kOff;
        } else if (mode[i] == kStick && ct * std::abs(vt) > mu * fn) {
          next = vt > 0.0 ? kSlideNeg : kSlidePos;
        } else if ((mode[i] == kSlideNeg && vt < 0.0) || (mode[i] == kSlidePos && vt > 0.0)) {
          next = kStick;
        }
        if (next != mode[i]) {
          mode[i] = next;
          changed = true;
        }
      }
      if (!changed) break;
    }
    for (int i = 0; i < nq_; ++i) q_[i] += h * u(i);
    pose_.x += h * u(nq_);
    pose_.y += h * u(nq_ + 1);
    pose_.theta += h * u(nq_ + 2);
    u_ = u;
    for (int i = 0; i < nq_; ++i) {
      if (pinned_[i]) q_[i] = std::clamp(q_[i], spec_.joint_min_rad, spec_.joint_max_rad);
    }
    if (!u_.allFinite() || !std::isfinite(pose_.x) || !std::isfinite(pose_.y) ||
        !std::isfinite(pose_.theta)) {
      throw Diverged("simulation state became non-finite", index);
    }
    refresh();
  }

  // Generalised force on the joints not held by a limit, and the net force
  // on the object, excluding damping of the joints themselves.
  double torque_residual() const {
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(n_);
    int j = 0;
    for (std::size_t f = 0; f < spec_.fingers.size(); ++f) {
      const auto t = actuation_torques(spec_.fingers[f],
                                       std::span<const double>(q_).subspan(j, spec_.fingers[f].phalanges.size()),
                                       tensions_[f]);
      for (double v : t) tau(j++) = v;
    }
    for (std::size_t i = 0; i < contacts_.size(); ++i) {
      tau += jacobians_[i].transpose() * contacts_[i].force;
    }
    double worst = 0.0;
    for (int i = 0; i < nq_; ++i) {
      if (!at_limit(i, tau(i))) worst = std::max(worst, std::abs(tau(i)));
    }
    return worst;
  }

  double object_net_force() const {
    Vec2 f = Vec2::Zero();
    for (const Contact& c : contacts_) f += c.force;
    return f.norm();
  }

  double max_penetration() const {
    double p = 0.0;
    for (const Contact& c : contacts_) p = std::max(p, c.penetration);
    return p;
  }

  double max_joint_speed() const {
    double v = 0.0;
    for (int i = 0; i < nq_; ++i) v = std::max(v, std::abs(u_(i)));
    return v;
  }
  double object_speed() const { return std::hypot(u_(nq_), u_(nq_ + 1)); }
  double object_spin() const { return std::abs(u_(nq_ + 2)); }

  // Upper bound on how far any finger point can still travel with no
  // contact: joints approach their clipped spring equilibrium monotonically.
  bool settled_out_of_reach() const {
    const RoundedConvex obj = object_.shape_at(pose_);
    int j = 0;
    int body = 1;
    for (std::size_t f = 0; f < spec_.fingers.size(); ++f) {
      const FingerSpec& fs = spec_.fingers[f];
      double travel = 0.0;
      for (const Phalanx& p : fs.phalanges) {
        const double target =
            std::clamp(p.rest_angle_rad + tensions_[f] * fs.pulley_radius_m / p.stiffness_nm_per_rad,
                       spec_.joint_min_rad, spec_.joint_max_rad);
        travel += std::abs(target - q_[j++]);
      }
      travel *= fs.total_length();
      for (std::size_t i = 0; i < fs.phalanges.size(); ++i, ++body) {
        const Segment s = fingers_[f].link(i);
        const double gap = clearance({{s.a, s.b}, 0.5 * fs.phalanges[i].thickness_m}, obj);
        if (gap <= travel + 1e-6) return false;
      }
    }
    return true;
  }

  const std::vector<Contact>& contacts() const { return contacts_; }
  const std::vector<double>& q() const { return q_; }
  const Pose2& pose() const { return pose_; }
  bool object_at_rest() const { return u_.tail<3>().isZero(0.0); }

 private:
  Eigen::Matrix<double, 2, Eigen::Dynamic> contact_jacobian(const Contact& c) const {
    Eigen::Matrix<double, 2, Eigen::Dynamic> g = Eigen::MatrixXd::Zero(2, n_);
    const Vec2 arm = c.point - Vec2(pose_.x, pose_.y);
    g(0, nq_) = 1.0;
    g(1, nq_ + 1) = 1.0;
    g.col(nq_ + 2) = perp(arm);
    const BodyRef& ref = bodies_[c.body_id];
    if (ref.finger >= 0) {
      const FingerPose& fp = fingers_[ref.finger];
      const double s = flex_sign(spec_.fingers[ref.finger].mount);
      for (int i = 0; i <= ref.link; ++i) {
        g.col(ref.first_joint + i) = -s * perp(c.point - fp.joints[i]);
      }
    }
    return g;
  }

  bool at_limit(int i, double push) const {
    const double tol = 1e-9;
    return (q_[i] <= spec_.joint_min_rad + tol && push <= 0.0) ||
           (q_[i] >= spec_.joint_max_rad - tol && push >= 0.0);
  }

  Eigen::VectorXd solve_with_limits(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    std::fill(pinned_.begin(), pinned_.end(), false);
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n_);
    const double h = cfg_.step_s;
    for (int round = 0; round <= nq_; ++round) {
      Eigen::MatrixXd ar = a;
      Eigen::VectorXd br = b;
      for (int i = 0; i < nq_; ++i) {
        if (!pinned_[i]) continue;
        br -= a.col(i) * fixed(i);
        ar.row(i).setZero();
        ar.col(i).setZero();
        ar(i, i) = 1.0;
        br(i) = fixed(i);
      }
      Eigen::VectorXd u = ar.partialPivLu().solve(br);
      bool changed = false;
      for (int i = 0; i < nq_; ++i) {
        if (pinned_[i]) continue;
        const double next = q_[i] + h * u(i);
        if (next > spec_.joint_max_rad) {
          pinned_[i] = true;
          fixed(i) = (spec_.joint_max_rad - q_[i]) / h;
          changed = true;
        } else if (next < spec_.joint_min_rad) {
          pinned_[i] = true;
          fixed(i) = (spec_.joint_min_rad - q_[i]) / h;
          changed = true;
        }
      }
      if (!changed) return u;
    }
    return Eigen::VectorXd::Zero(n_);
  }

  const MechanismSpec& spec_;
  const SimObject& object_;
  const SimConfig& cfg_;
  std::vector<double> tensions_;
  int nq_ = 0;
  int n_ = 0;
  int k_ = 0;
  std::vector<BodyRef> bodies_;
  std::vector<double> q_;
  Eigen::VectorXd u_;
  Pose2 pose_;
  Eigen::Vector3d mass_;
  Eigen::Vector3d damping_;
  PenaltyParams penalty_;
  std::vector<bool> pinned_;
  std::vector<FingerPose> fingers_;
  std::vector<Contact> contacts_;
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> jacobians_;
};

TraceSample sample_of(double t, const Stepper& s) {
  return {t, s.pose(), s.q(), s.contacts()};
}

int distinct_bodies(const std::vector<Contact>& contacts) {
  std::set<int> ids;
  for (const Contact& c : contacts) ids.insert(c.body_id);
  return static_cast<int>(ids.size());
}

}  // namespace

SimTrace run_grasp(const MechanismSpec& spec, const SimObject& object,
                   std::span<const double> tensions, const SimConfig& cfg, std::uint64_t,
                   std::span<const double> initial_q) {
  cfg.check();
  object.check();
  if (tensions.size() != spec.fingers.size()) {
    throw DimensionMismatch("expected one tension per finger");
  }
  for (double t : tensions) {
    if (!(t >= 0.0)) throw ConfigError("tensions must be non-negative");
  }
  if (!initial_q.empty()) {
    if (static_cast<int>(initial_q.size()) != spec.joint_count()) {
      throw DimensionMismatch("initial joint angles do not match the design");
    }
    for (double q : initial_q) {
      if (!(q >= spec.joint_min_rad && q <= spec.joint_max_rad)) {
        throw ConfigError("initial joint angle outside the joint limits");
      }
    }
  }

  SimTrace trace;
  trace.t_max = cfg.t_max_s;
  trace.bodies_total = spec.body_count();
  trace.fail_distance = std::max(object.characteristic_size(), cfg.fail_distance_min_m);

  const double h = cfg.step_s;
  const auto total_steps = static_cast<std::int64_t>(std::llround(cfg.t_max_s / h));
  const auto hold_steps = static_cast<std::int64_t>(std::llround(cfg.t_hold_s / h));
  const auto loss_steps = static_cast<std::int64_t>(std::llround(cfg.t_loss_s / h));
  const int dec = cfg.trace_decimation;

  Stepper sim(spec, object, tensions, cfg, initial_q);
  if (!sim.contacts().empty()) {
    trace.initial_overlap = true;
    if (dec > 0) trace.samples.push_back(sample_of(0.0, sim));
    return trace;
  }
  std::set<int> touched_ever;
  std::set<int> touched_still;
  std::int64_t still_since = -1;
  std::optional<std::int64_t> lost_since;
  std::optional<std::int64_t> grasp_step;
  std::int64_t n = 0;
  bool aborted = false;

  for (;; ++n) {
    const double t = n * h;
    const auto& contacts = sim.contacts();
    if (dec > 0 && n % dec == 0) trace.samples.push_back(sample_of(t, sim));
    const bool touching = !contacts.empty();
    for (const Contact& c : contacts) touched_ever.insert(c.body_id);

    if (touching && !trace.events.t_first_contact) trace.events.t_first_contact = t;
    if (trace.events.t_first_contact) {
      if (touching) {
        lost_since.reset();
      } else {
        if (!lost_since) lost_since = n;
        if (n - *lost_since > loss_steps) {
          trace.events.t_contact_loss = *lost_since * h;
          aborted = true;
          break;
        }
      }
    }

    const bool still = sim.max_joint_speed() < cfg.eps_joint_rad_s &&
                       sim.object_speed() < cfg.eps_object_m_s &&
                       sim.object_spin() < cfg.eps_object_rad_s &&
                       distinct_bodies(contacts) >= 2;
    if (still) {
      if (still_since < 0) {
        still_since = n;
        touched_still.clear();
      }
      for (const Contact& c : contacts) touched_still.insert(c.body_id);
      if (n - still_since >= hold_steps) {
        grasp_step = n;
        break;
      }
    } else {
      still_since = -1;
    }

    if (n >= total_steps) break;
    if (dec == 0 && !trace.events.t_first_contact && n % 10 == 0 && sim.object_at_rest() &&
        sim.settled_out_of_reach()) {
      // Nothing can touch the object any more; the outcome is fixed.
      n = total_steps;
      break;
    }
    sim.step(Vec2::Zero(), n);
  }
  trace.steps = n;

  if (!grasp_step) {
    trace.events.t_final = aborted ? n * h : std::min(n * h, cfg.t_max_s);
    trace.bodies_contacted = static_cast<int>(touched_ever.size());
    return trace;
  }

  const double t_grasp = *grasp_step * h;
  trace.events.t_grasp = t_grasp;
  trace.bodies_contacted = static_cast<int>(touched_still.size());
  {
    const auto& contacts = sim.contacts();
    Vec2 centroid = Vec2::Zero();
    for (const Contact& c : contacts) {
      trace.grasp_forces.push_back(c.force.norm());
      centroid += c.point;
    }
    trace.contact_centroid_at_grasp = centroid / static_cast<double>(contacts.size());
    trace.object_center_at_grasp = Vec2(sim.pose().x, sim.pose().y);
    trace.grasp_torque_residual = sim.torque_residual();
    trace.grasp_object_net_force = sim.object_net_force();
    trace.grasp_max_penetration = sim.max_penetration();
  }

  // Load stage, one continuation per direction; keep the worst.
  trace.load_applied = true;
  const auto ramp_steps = static_cast<std::int64_t>(std::llround(cfg.ramp_s / h));
  const double peak = cfg.load_factor * object.mass_kg * cfg.gravity_m_s2;
  const Vec2 start = trace.object_center_at_grasp;
  double worst = -1.0;
  bool worst_escaped = false;
  std::vector<TraceSample> worst_samples;
  double worst_end = t_grasp;
  std::int64_t load_steps = 0;
  for (const Vec2& dir_raw : cfg.force_directions) {
    const Vec2 dir = dir_raw.normalized();
    Stepper branch = sim;
    std::vector<TraceSample> samples;
    bool escaped = false;
    std::int64_t k = 1;
    for (; k <= ramp_steps; ++k) {
      const Vec2 load = peak * (static_cast<double>(k) / ramp_steps) * dir;
      branch.step(load, *grasp_step + k);
      if (dec > 0 && k % dec == 0) samples.push_back(sample_of(t_grasp + k * h, branch));
      const double moved = (Vec2(branch.pose().x, branch.pose().y) - start).norm();
      if (moved > trace.fail_distance) {
        escaped = true;
        break;
      }
    }
    load_steps += std::min(k, ramp_steps);
    const double moved = (Vec2(branch.pose().x, branch.pose().y) - start).norm();
    const bool worse = (escaped && !worst_escaped) || (escaped == worst_escaped && moved > worst);
    if (worse) {
      worst = moved;
      worst_escaped = escaped;
      worst_samples = std::move(samples);
      worst_end = t_grasp + std::min(k, ramp_steps) * h;
    }
  }
  trace.steps += load_steps;
  trace.escaped = worst_escaped;
  trace.load_displacement = worst;
  trace.events.t_final = worst_end;
  for (auto& s : worst_samples) trace.samples.push_back(std::move(s));
  return trace;
}

std::string trace_csv(const SimTrace& trace) {
  std::ostringstream os;
  os.precision(9);
  os << "t,object_x,object_y,object_theta,n_contacts,sum_normal_force\n";
  for (const TraceSample& s : trace.samples) {
    double fn = 0.0;
    for (const Contact& c : s.contacts) fn += c.normal_force;
    os << s.t << ',' << s.object_pose.x << ',' << s.object_pose.y << ',' << s.object_pose.theta
       << ',' << s.contacts.size() << ',' << fn << '\n';
  }
  return os.str();
}

}  // namespace graspgen
