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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "graspgen/mechanism.hpp"
#include "graspgen/sim.hpp"

namespace graspgen {

struct RewardWeights {
  std::array<double, 6> w = {3.0, 2.0, 1.0, 1.0, 1.0, 5.0};

  // The default weights.
  static RewardWeights decomposition_preset() { return {{3.0, 2.0, 1.0, 1.0, 1.0, 5.0}}; }
  // Same as the default with w2 = 1.
  static RewardWeights text_preset() { return {{3.0, 1.0, 1.0, 1.0, 1.0, 5.0}}; }

  double sum() const;
};

struct RewardBreakdown {
  std::array<double, 6> r{};
  double total = 0.0;
};

// Contact-time term: 0 without contact, 1 for a secured grasp, otherwise
// 1 / (1 + t_rem^2 / t_max^2) with t_rem the time left after contact was
// lost (t_final when it never was).
double r1_time(const SimTrace& trace);
double r2_contact_fraction(const SimTrace& trace);
double r3_force_dispersion(const SimTrace& trace);
double r4_centroid_distance(const SimTrace& trace);
double r5_grasp_speed(const SimTrace& trace);
double r6_load_resistance(const SimTrace& trace);

double combine(const std::array<double, 6>& r, const RewardWeights& weights);
RewardBreakdown score(const SimTrace& trace, const RewardWeights& weights);

struct EvaluationSetup {
  std::vector<SimObject> objects;
  std::vector<double> tension_levels_n = {5.0, 10.0, 15.0};
  std::vector<double> orientations_deg = {0.0, 45.0};
  RewardWeights weights;
  SimConfig sim;
  // Maximum worker threads; 0 means the OpenMP default.
  int threads = 0;
};

struct ObjectReward {
  double best_total = 0.0;
  std::vector<double> best_controls;
  RewardBreakdown breakdown;
};

struct DesignReward {
  std::map<std::string, ObjectReward> per_object;
  double final = 0.0;
  std::int64_t sim_count = 0;
};

// Every tension assignment of `levels` to `fingers` fingers, in
// lexicographic order of level index.
std::vector<std::vector<double>> tension_grid(const std::vector<double>& levels, int fingers);

// Runs one simulation per (object, orientation, tension assignment). For
// each object the orientation-averaged reward is maximised over the grid;
// the final reward sums those maxima. Parallel over simulations with
// OpenMP. Throws Diverged naming the failing combination.
DesignReward evaluate_design(const MechanismSpec& spec, const EvaluationSetup& setup,
                             std::uint64_t seed = 0);

// Single-threaded reference of evaluate_design; results are identical.
DesignReward evaluate_design_serial(const MechanismSpec& spec, const EvaluationSetup& setup,
                                    std::uint64_t seed = 0);

// Default three-object set, centred in the workspace.
std::vector<SimObject> default_objects();
Point2 default_workspace_center();

}  // namespace graspgen
