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

#include "graspgen/reward.hpp"

#include <algorithm>
#include <cmath>

namespace graspgen {

double RewardWeights::sum() const {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

double r1_time(const SimTrace& trace) {
  if (!trace.events.t_first_contact) return 0.0;
  if (trace.events.t_grasp) return 1.0;
  const double lost = trace.events.t_contact_loss.value_or(trace.events.t_final);
  const double remaining = trace.t_max - lost;
  return 1.0 / (1.0 + remaining * remaining / (trace.t_max * trace.t_max));
}

double r2_contact_fraction(const SimTrace& trace) {
  if (trace.bodies_total <= 0) return 0.0;
  return static_cast<double>(trace.bodies_contacted) / trace.bodies_total;
}

double r3_force_dispersion(const SimTrace& trace) {
  if (!trace.events.t_grasp || trace.grasp_forces.empty()) return 0.0;
  const auto& f = trace.grasp_forces;
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f) var += (v - mean) * (v - mean);
  var /= static_cast<double>(f.size());
  return 1.0 / (1.0 + std::sqrt(var));
}

double r4_centroid_distance(const SimTrace& trace) {
  if (!trace.events.t_grasp) return 0.0;
  return 1.0 / (1.0 + (trace.contact_centroid_at_grasp - trace.object_center_at_grasp).norm());
}

double r5_grasp_speed(const SimTrace& trace) {
  if (!trace.events.t_grasp) return 0.0;
  return std::clamp((trace.t_max - *trace.events.t_grasp) / trace.t_max, 0.0, 1.0);
}

double r6_load_resistance(const SimTrace& trace) {
  if (!trace.load_applied || trace.escaped) return 0.0;
  return std::clamp(1.0 - trace.load_displacement / trace.fail_distance, 0.0, 1.0);
}

double combine(const std::array<double, 6>& r, const RewardWeights& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) total += weights.w[i] * r[i];
  return total;
}

RewardBreakdown score(const SimTrace& trace, const RewardWeights& weights) {
  RewardBreakdown b;
  b.r = {r1_time(trace),          r2_contact_fraction(trace), r3_force_dispersion(trace),
         r4_centroid_distance(trace), r5_grasp_speed(trace),  r6_load_resistance(trace)};
  b.total = combine(b.r, weights);
  return b;
}

Point2 default_workspace_center() { return {0.0, -0.05}; }

std::vector<SimObject> default_objects() {
  const Point2 c = default_workspace_center();
  std::vector<SimObject> out = {
      SimObject::disc("disc", 0.03, 0.1),
      SimObject::rect("box", 0.05, 0.05, 0.1),
      SimObject::polygon("hexagon", 6, 0.035, 0.1),
  };
  for (auto& o : out) o.initial_pose = {c.x, c.y, 0.0};
  return out;
}

}  // namespace graspgen
