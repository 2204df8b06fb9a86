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

#include <cmath>

#include "doctest.h"
#include "graspgen/geometry.hpp"

using namespace graspgen;

namespace {

RoundedConvex capsule(Vec2 a, Vec2 b, double r) { return {{a, b}, r}; }
RoundedConvex disc(Vec2 c, double r) { return {{c}, r}; }
RoundedConvex square(Vec2 c, double half) {
  return {{c + Vec2(-half, -half), c + Vec2(half, -half), c + Vec2(half, half),
           c + Vec2(-half, half)},
          0.0};
}

}  // namespace

TEST_CASE("closest point on a segment") {
  const Segment s{{0, 0}, {1, 0}};
  CHECK(closest_on_segment({0.5, 2.0}, s).isApprox(Vec2(0.5, 0.0)));
  CHECK(closest_on_segment({-1.0, 1.0}, s).isApprox(Vec2(0.0, 0.0)));
  CHECK(closest_on_segment({3.0, -1.0}, s).isApprox(Vec2(1.0, 0.0)));
  const Segment degenerate{{0.2, 0.2}, {0.2, 0.2}};
  CHECK(closest_on_segment({1.0, 1.0}, degenerate).isApprox(Vec2(0.2, 0.2)));
}

TEST_CASE("disc far from a capsule has no proximity") {
  const auto p = proximity(capsule({0, 0}, {0.1, 0}, 0.005), disc({0.05, 0.5}, 0.03));
  CHECK_FALSE(p.has_value());
  CHECK(clearance(capsule({0, 0}, {0.1, 0}, 0.005), disc({0.05, 0.5}, 0.03)) ==
        doctest::Approx(0.5 - 0.035));
}

TEST_CASE("disc overlapping a capsule") {
  // Centre 0.02 above the segment: overlap = 0.005 + 0.03 - 0.02.
  const auto p = proximity(capsule({0, 0}, {0.1, 0}, 0.005), disc({0.05, 0.02}, 0.03));
  REQUIRE(p.has_value());
  CHECK(p->penetration == doctest::Approx(0.015));
  CHECK(p->normal.isApprox(Vec2(0, 1)));
}

TEST_CASE("disc centre on the segment") {
  // Zero core distance: penetration is the sum of the radii.
  const auto p = proximity(capsule({0, 0}, {0.1, 0}, 0.005), disc({0.05, 0.0}, 0.03));
  REQUIRE(p.has_value());
  CHECK(p->penetration == doctest::Approx(0.035));
}

TEST_CASE("capsule against a square face") {
  const auto p = proximity(capsule({-0.02, 0.024}, {0.02, 0.024}, 0.005), square({0, 0}, 0.02));
  REQUIRE(p.has_value());
  CHECK(p->penetration == doctest::Approx(0.001));
  CHECK(p->normal.isApprox(Vec2(0, -1), 1e-9));
  CHECK(std::abs(p->point.x()) < 1e-9);
}

TEST_CASE("symmetric pinch gives opposite normals") {
  const RoundedConvex obj = disc({0, 0}, 0.03);
  const auto left = proximity(capsule({-0.034, -0.05}, {-0.034, 0.05}, 0.005), obj);
  const auto right = proximity(capsule({0.034, -0.05}, {0.034, 0.05}, 0.005), obj);
  REQUIRE(left.has_value());
  REQUIRE(right.has_value());
  CHECK((left->normal + right->normal).norm() < 1e-12);
  CHECK(left->penetration == doctest::Approx(right->penetration));
}

TEST_CASE("margin reports near misses") {
  const RoundedConvex a = capsule({0, 0}, {0.1, 0}, 0.005);
  const RoundedConvex b = disc({0.05, 0.0360}, 0.03);
  CHECK_FALSE(proximity(a, b).has_value());
  const auto p = proximity(a, b, 0.002);
  REQUIRE(p.has_value());
  CHECK(p->penetration == doctest::Approx(-0.001));
}

TEST_CASE("perp and cross") {
  CHECK(perp(Vec2(1, 0)).isApprox(Vec2(0, 1)));
  CHECK(cross2(Vec2(1, 0), Vec2(0, 1)) == 1.0);
}
