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

#include <filesystem>
#include <span>
#include <string>

#include "graspgen/mechanism.hpp"
#include "graspgen/sim.hpp"

namespace graspgen {

struct RenderOptions {
  double frame_interval_s = 0.05;
  double px_per_m = 2000.0;
};

// One SVG frame. World +y points up in the image.
std::string render_frame_svg(const MechanismSpec& spec, const SimObject& object,
                             const TraceSample& sample, double px_per_m = 2000.0);

// Columns: t, total normal force on the object.
std::string forces_csv(const SimTrace& trace);

// Runs one grasp and writes frame_0000.svg, frame_0001.svg, ... and forces.csv
// into `out_dir`. Returns the trace.
SimTrace render_grasp(const MechanismSpec& spec, const SimObject& object,
                      std::span<const double> tensions, SimConfig cfg,
                      const RenderOptions& opts, const std::filesystem::path& out_dir);

}  // namespace graspgen
