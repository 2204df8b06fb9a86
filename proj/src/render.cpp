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

#include "graspgen/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "graspgen/errors.hpp"

namespace graspgen {

namespace {

// Fixed-precision formatting keeps frames byte-stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Canvas {
 public:
  Canvas(Vec2 center, double half_extent, double px_per_m)
      : center_(center), half_(half_extent), scale_(px_per_m) {}

  double size_px() const { return 2.0 * half_ * scale_; }
  double len(double m) const { return m * scale_; }
  std::string x(const Vec2& p) const { return num((p.x() - center_.x() + half_) * scale_); }
  std::string y(const Vec2& p) const { return num((center_.y() + half_ - p.y()) * scale_); }
  std::string xy(const Vec2& p) const { return x(p) + "," + y(p); }

 private:
  Vec2 center_;
  double half_;
  double scale_;
};

void draw_shape(std::ostream& os, const Canvas& c, const RoundedConvex& s, const char* fill,
                const char* stroke) {
  if (s.core.size() == 1) {
    os << "<circle cx=\"" << c.x(s.core[0]) << "\" cy=\"" << c.y(s.core[0]) << "\" r=\""
       << num(c.len(s.radius)) << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    return;
  }
  // A round-joined stroke of width 2r draws the rounded outline.
  os << "<polygon points=\"";
  for (std::size_t i = 0; i < s.core.size(); ++i) os << (i ? " " : "") << c.xy(s.core[i]);
  os << "\" fill=\"" << fill << "\" stroke=\"" << fill << "\" stroke-width=\""
     << num(std::max(c.len(2.0 * s.radius), 1.0)) << "\" stroke-linejoin=\"round\"/>\n";
}

}  // namespace

std::string render_frame_svg(const MechanismSpec& spec, const SimObject& object,
                             const TraceSample& sample, double px_per_m) {
  double reach = 0.5 * spec.palm.width_m;
  for (const FingerSpec& f : spec.fingers) reach = std::max(reach, f.total_length());
  const Vec2 obj(sample.object_pose.x, sample.object_pose.y);
  const double half = std::max(reach, obj.norm() + object.characteristic_size()) + 0.02;
  const Canvas c(Vec2::Zero(), half, px_per_m);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(c.size_px())
     << "\" height=\"" << num(c.size_px()) << "\" viewBox=\"0 0 " << num(c.size_px()) << ' '
     << num(c.size_px()) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const double pw = 0.5 * spec.palm.width_m;
  const double pt = 0.5 * spec.palm.thickness_m;
  draw_shape(os, c, {{{-pw, -pt}, {pw, -pt}, {pw, pt}, {-pw, pt}}, 0.0}, "#888888", "none");

  draw_shape(os, c, object.shape_at(sample.object_pose), "#8ab4e0", "#2a5d8f");

  const auto poses = forward_kinematics(spec, sample.q);
  for (std::size_t f = 0; f < poses.size(); ++f) {
    const FingerSpec& finger = spec.fingers[f];
    for (std::size_t i = 0; i < finger.phalanges.size(); ++i) {
      const Segment seg = poses[f].link(i);
      os << "<line x1=\"" << c.x(seg.a) << "\" y1=\"" << c.y(seg.a) << "\" x2=\"" << c.x(seg.b)
         << "\" y2=\"" << c.y(seg.b) << "\" stroke=\"#d08030\" stroke-width=\""
         << num(c.len(finger.phalanges[i].thickness_m)) << "\" stroke-linecap=\"round\"/>\n";
    }
    for (const Vec2& j : poses[f].joints) {
      os << "<circle cx=\"" << c.x(j) << "\" cy=\"" << c.y(j) << "\" r=\"2.00\" fill=\"black\"/>\n";
    }
  }

  // Contact points, with forces drawn at 1 mm per newton.
  for (const Contact& ct : sample.contacts) {
    const Vec2 tip = ct.point + 1e-3 * ct.force;
    os << "<circle class=\"contact\" cx=\"" << c.x(ct.point) << "\" cy=\"" << c.y(ct.point)
       << "\" r=\"4.00\" fill=\"red\"/>\n";
    os << "<line x1=\"" << c.x(ct.point) << "\" y1=\"" << c.y(ct.point) << "\" x2=\"" << c.x(tip)
       << "\" y2=\"" << c.y(tip) << "\" stroke=\"red\" stroke-width=\"1.50\"/>\n";
  }
  os << "<text x=\"8\" y=\"20\" font-family=\"monospace\" font-size=\"14\">t = "
     << num(sample.t) << " s</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string forces_csv(const SimTrace& trace) {
  std::ostringstream os;
  os.precision(9);
  os << "t,total_normal_force_n\n";
  for (const TraceSample& s : trace.samples) {
    double fn = 0.0;
    for (const Contact& ct : s.contacts) fn += ct.normal_force;
    os << s.t << ',' << fn << '\n';
  }
  return os.str();
}

SimTrace render_grasp(const MechanismSpec& spec, const SimObject& object,
                      std::span<const double> tensions, SimConfig cfg,
                      const RenderOptions& opts, const std::filesystem::path& out_dir) {
  if (!(opts.frame_interval_s > 0.0)) throw ConfigError("render: frame interval must be positive");
  cfg.trace_decimation =
      std::max(1, static_cast<int>(std::lround(opts.frame_interval_s / cfg.step_s)));
  SimTrace trace = run_grasp(spec, object, tensions, cfg);

  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.svg", i);
    std::ofstream out(out_dir / name, std::ios::binary);
    out << render_frame_svg(spec, object, trace.samples[i], opts.px_per_m);
    if (!out) throw Error("render: cannot write " + (out_dir / name).string());
  }
  std::ofstream forces(out_dir / "forces.csv", std::ios::binary);
  forces << forces_csv(trace);
  if (!forces) throw Error("render: cannot write forces.csv");
  return trace;
}

}  // namespace graspgen
