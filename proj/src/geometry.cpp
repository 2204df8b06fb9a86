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

#include "graspgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspgen {

namespace {

// Candidate pairs whose distance is within this band of the minimum share
// the contact point, weighted linearly. Keeps the point continuous when a
// flat face settles against an edge.
constexpr double kFeatureBand = 2e-4;

struct FeaturePair {
  Vec2 on_a;
  Vec2 on_b;
  double dist;
};

int edge_count(const RoundedConvex& s) {
  const int n = static_cast<int>(s.core.size());
  if (n <= 1) return 0;
  if (n == 2) return 1;
  return n;
}

Segment edge(const RoundedConvex& s, int i) {
  const int n = static_cast<int>(s.core.size());
  return {s.core[i], s.core[(i + 1) % n]};
}

void collect_pairs(const RoundedConvex& a, const RoundedConvex& b, std::vector<FeaturePair>& out) {
  // Vertices of a against edges of b, and the converse.
  const int eb = edge_count(b);
  for (const Vec2& v : a.core) {
    if (eb == 0) {
      out.push_back({v, b.core.front(), (b.core.front() - v).norm()});
    }
    for (int i = 0; i < eb; ++i) {
      const Vec2 c = closest_on_segment(v, edge(b, i));
      out.push_back({v, c, (c - v).norm()});
    }
  }
  const int ea = edge_count(a);
  for (const Vec2& v : b.core) {
    for (int i = 0; i < ea; ++i) {
      const Vec2 c = closest_on_segment(v, edge(a, i));
      out.push_back({c, v, (c - v).norm()});
    }
  }
}

bool segments_intersect(const Segment& p, const Segment& q) {
  const Vec2 r = p.b - p.a;
  const Vec2 s = q.b - q.a;
  const double denom = cross2(r, s);
  const Vec2 qp = q.a - p.a;
  if (std::abs(denom) < 1e-18) return false;
  const double t = cross2(qp, s) / denom;
  const double u = cross2(qp, r) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

bool point_in_polygon(const Vec2& p, const RoundedConvex& poly) {
  const int n = static_cast<int>(poly.core.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly.core[i];
    const Vec2& b = poly.core[(i + 1) % n];
    if (cross2(b - a, p - a) < 0.0) return false;
  }
  return true;
}

bool cores_overlap(const RoundedConvex& a, const RoundedConvex& b) {
  for (const Vec2& v : a.core) {
    if (point_in_polygon(v, b)) return true;
  }
  for (const Vec2& v : b.core) {
    if (point_in_polygon(v, a)) return true;
  }
  const int ea = edge_count(a);
  const int eb = edge_count(b);
  for (int i = 0; i < ea; ++i) {
    for (int j = 0; j < eb; ++j) {
      if (segments_intersect(edge(a, i), edge(b, j))) return true;
    }
  }
  return false;
}

void project(const RoundedConvex& s, const Vec2& axis, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const Vec2& v : s.core) {
    const double d = v.dot(axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
}

// Minimum-translation axis for overlapping cores; normal points a -> b.
Proximity overlap_proximity(const RoundedConvex& a, const RoundedConvex& b) {
  std::vector<Vec2> axes;
  auto add_axes = [&axes](const RoundedConvex& s) {
    const int e = edge_count(s);
    for (int i = 0; i < e; ++i) {
      const Segment sg = (e == 1) ? Segment{s.core[0], s.core[1]} : edge(s, i);
      const Vec2 d = sg.b - sg.a;
      if (d.squaredNorm() > 0.0) {
        const Vec2 n = perp(d).normalized();
        axes.push_back(n);
        axes.push_back(-n);
      }
    }
  };
  add_axes(a);
  add_axes(b);
  Proximity best;
  double best_depth = std::numeric_limits<double>::infinity();
  for (const Vec2& n : axes) {
    double alo, ahi, blo, bhi;
    project(a, n, alo, ahi);
    project(b, n, blo, bhi);
    // Distance b must move along n to clear a.
    const double depth = ahi - blo;
    if (depth < best_depth) {
      best_depth = depth;
      best.normal = n;
    }
  }
  best.penetration = best_depth + a.radius + b.radius;
  // Deepest point of b against the chosen axis, pulled back halfway.
  double lo = std::numeric_limits<double>::infinity();
  Vec2 deepest = b.core.front();
  for (const Vec2& v : b.core) {
    const double d = v.dot(best.normal);
    if (d < lo) {
      lo = d;
      deepest = v;
    }
  }
  best.point = deepest + best.normal * (0.5 * best_depth - b.radius);
  return best;
}

}  // namespace

Vec2 closest_on_segment(const Vec2& p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 <= 0.0) return s.a;
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return s.a + t * d;
}

std::optional<Proximity> proximity(const RoundedConvex& a, const RoundedConvex& b,
                                   double margin) {
  if (cores_overlap(a, b)) return overlap_proximity(a, b);

  std::vector<FeaturePair> pairs;
  pairs.reserve(16);
  collect_pairs(a, b, pairs);
  double dmin = std::numeric_limits<double>::infinity();
  const FeaturePair* closest = nullptr;
  for (const auto& p : pairs) {
    if (p.dist < dmin) {
      dmin = p.dist;
      closest = &p;
    }
  }
  const double reach = a.radius + b.radius;
  if (closest == nullptr || dmin >= reach + margin) return std::nullopt;
  if (dmin <= 1e-12) return overlap_proximity(a, b);

  Proximity out;
  out.normal = (closest->on_b - closest->on_a) / dmin;
  out.penetration = reach - dmin;
  Vec2 weighted = Vec2::Zero();
  double wsum = 0.0;
  for (const auto& p : pairs) {
    const double w = 1.0 - (p.dist - dmin) / kFeatureBand;
    if (w <= 0.0) continue;
    // Midpoint between the two inflated surfaces along the common normal.
    const Vec2 mid = 0.5 * ((p.on_a + out.normal * a.radius) + (p.on_b - out.normal * b.radius));
    weighted += w * mid;
    wsum += w;
  }
  out.point = weighted / wsum;
  return out;
}

double clearance(const RoundedConvex& a, const RoundedConvex& b) {
  if (cores_overlap(a, b)) return -overlap_proximity(a, b).penetration;
  std::vector<FeaturePair> pairs;
  collect_pairs(a, b, pairs);
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) dmin = std::min(dmin, p.dist);
  return dmin - a.radius - b.radius;
}

}  // namespace graspgen
