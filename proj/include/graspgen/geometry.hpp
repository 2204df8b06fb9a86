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

// Planar narrow-phase between rounded convex shapes: a core (point, segment
// or CCW polygon) inflated by a radius. Phalanges are capsules, the palm a
// box, objects are discs or polygons.

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace graspgen {

using Vec2 = Eigen::Vector2d;

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct RoundedConvex {
  // 1 vertex = point, 2 = segment, >= 3 = polygon in CCW order.
  std::vector<Vec2> core;
  double radius = 0.0;
};

// Closest point on `s` to `p`.
Vec2 closest_on_segment(const Vec2& p, const Segment& s);

struct Proximity {
  // Unit vector from `a` towards `b`.
  Vec2 normal = Vec2::Zero();
  // Positive when the shapes overlap.
  double penetration = 0.0;
  // Midpoint of the overlap region.
  Vec2 point = Vec2::Zero();
};

// Signed proximity between two shapes. Returns nullopt when they are further
// apart than `margin`; a returned value may have negative penetration
// (separation) when margin > 0.
std::optional<Proximity> proximity(const RoundedConvex& a, const RoundedConvex& b,
                                   double margin = 0.0);

// Separation between the inflated surfaces (negative when overlapping).
double clearance(const RoundedConvex& a, const RoundedConvex& b);

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace graspgen
