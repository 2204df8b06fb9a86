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

#include "graspgen/grammar.hpp"
#include "graspgen/mechanism.hpp"
#include "graspgen/reward.hpp"
#include "graspgen/search.hpp"
#include "graspgen/sim.hpp"

namespace graspgen {

inline constexpr const char* kVersion = "0.1.0";

// Everything a run needs. Serialized as JSON with units in the key names.
struct Config {
  GrammarParams grammar;
  GrammarLimits limits;
  PhysicalDefaults mechanism;
  SimConfig sim;
  // objects, tension levels, orientations, weights.
  EvaluationSetup reward;
  Point2 workspace_center = default_workspace_center();
  SearchConfig search;
  std::string output_dir = "out";

  static Config defaults();
  // Throws ConfigError.
  void check() const;
};

// Missing keys keep their defaults. Throws ConfigError.
Config config_from_json(const std::string& text);
std::string config_to_json(const Config& cfg);
Config load_config(const std::string& path);

// Config files name objects; this resolves a name to its entry.
// Throws ConfigError.
const SimObject& find_object(const Config& cfg, const std::string& name);

std::string design_reward_json(const DesignReward& reward, const RewardWeights& weights);

}  // namespace graspgen
