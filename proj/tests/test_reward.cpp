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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "graspgen/errors.hpp"
#include "graspgen/reward.hpp"
#include "test_support.hpp"

using namespace graspgen;
using graspgen::testing::centred;
using graspgen::testing::make_design;
using graspgen::testing::two_finger_spec;

namespace {

SimTrace secured_trace() {
  SimTrace t;
  t.t_max = 5.0;
  t.events.t_first_contact = 0.3;
  t.events.t_grasp = 1.25;
  t.events.t_final = 2.25;
  t.bodies_total = 5;
  t.bodies_contacted = 2;
  t.grasp_forces = {2.0, 2.0};
  t.contact_centroid_at_grasp = Vec2(0.0, -0.05);
  t.object_center_at_grasp = Vec2(0.0, -0.05);
  t.load_applied = true;
  t.fail_distance = 0.06;
  t.load_displacement = 0.0;
  return t;
}

double population_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

EvaluationSetup small_setup(std::vector<double> levels, std::vector<double> orientations) {
  EvaluationSetup setup;
  setup.objects = default_objects();
  setup.tension_levels_n = std::move(levels);
  setup.orientations_deg = std::move(orientations);
  return setup;
}

}  // namespace

TEST_CASE("worked decomposition") {
  const std::array<double, 6> r = {1, 0.31, 0.36, 0.96, 0.77, 0.95};
  CHECK(std::abs(combine(r, RewardWeights::decomposition_preset()) - 10.46) < 1e-9);
  CHECK(combine({1, 1, 1, 1, 1, 1}, RewardWeights::text_preset()) == 12.0);
  CHECK(combine({0, 0, 0, 0, 0, 0}, RewardWeights{}) == 0.0);
  CHECK(RewardWeights{}.sum() == 13.0);
}

TEST_CASE("r1 time criterion") {
  SimTrace t = secured_trace();
  CHECK(r1_time(t) == 1.0);

  SimTrace none;
  none.t_max = 5.0;
  CHECK(r1_time(none) == 0.0);

  SimTrace lost;
  lost.t_max = 5.0;
  lost.events.t_first_contact = 0.0;
  lost.events.t_contact_loss = 0.0;
  CHECK(r1_time(lost) == doctest::Approx(0.5));

  // Longer contact scores higher.
  lost.events.t_contact_loss = 2.0;
  const double r_early = r1_time(lost);
  lost.events.t_contact_loss = 4.0;
  CHECK(r1_time(lost) > r_early);
  CHECK(r1_time(lost) == doctest::Approx(1.0 / (1.0 + 1.0 / 25.0)));
}

TEST_CASE("r2 contact fraction") {
  SimTrace t;
  t.bodies_total = 4;
  t.bodies_contacted = 2;
  CHECK(r2_contact_fraction(t) == 0.5);
  t.bodies_contacted = 4;
  CHECK(r2_contact_fraction(t) == 1.0);
}

TEST_CASE("r3 force dispersion") {
  SimTrace t = secured_trace();
  CHECK(r3_force_dispersion(t) == 1.0);
  t.grasp_forces = {1.0, 3.0};
  CHECK(r3_force_dispersion(t) == doctest::Approx(0.5));
  t.grasp_forces = {0.5, 1.0, 4.0};
  CHECK(r3_force_dispersion(t) == doctest::Approx(1.0 / (1.0 + population_std(t.grasp_forces))));
  double prev = 2.0;
  for (double spread = 0.0; spread < 5.0; spread += 0.5) {
    t.grasp_forces = {3.0 - spread, 3.0 + spread};
    const double r = r3_force_dispersion(t);
    CHECK(r < prev);
    prev = r;
  }
  t.events.t_grasp.reset();
  CHECK(r3_force_dispersion(t) == 0.0);
}

TEST_CASE("r4 centroid distance") {
  SimTrace t = secured_trace();
  CHECK(r4_centroid_distance(t) == 1.0);
  t.contact_centroid_at_grasp = t.object_center_at_grasp + Vec2(0.6, 0.8);
  CHECK(r4_centroid_distance(t) == doctest::Approx(0.5));
  t.contact_centroid_at_grasp = t.object_center_at_grasp + Vec2(0.0, 0.04);
  CHECK(r4_centroid_distance(t) == doctest::Approx(1.0 / 1.04));
  CHECK(r4_centroid_distance(t) == doctest::Approx(0.9615).epsilon(1e-4));
  double prev = 2.0;
  for (double d = 0.0; d < 0.1; d += 0.01) {
    t.contact_centroid_at_grasp = t.object_center_at_grasp + Vec2(d, 0.0);
    CHECK(r4_centroid_distance(t) < prev);
    prev = r4_centroid_distance(t);
  }
}

TEST_CASE("r5 grasp speed") {
  SimTrace t = secured_trace();
  t.events.t_grasp = 0.0;
  CHECK(r5_grasp_speed(t) == 1.0);
  t.events.t_grasp = 5.0;
  CHECK(r5_grasp_speed(t) == 0.0);
  t.events.t_grasp = 1.25;
  CHECK(r5_grasp_speed(t) == doctest::Approx(0.75));
  double prev = 2.0;
  for (double tg = 0.0; tg <= 5.0; tg += 0.25) {
    t.events.t_grasp = tg;
    CHECK(r5_grasp_speed(t) < prev);
    prev = r5_grasp_speed(t);
  }
}

TEST_CASE("r6 load resistance") {
  SimTrace t = secured_trace();
  CHECK(r6_load_resistance(t) == 1.0);
  t.load_displacement = 0.03;
  CHECK(r6_load_resistance(t) == doctest::Approx(0.5));
  t.escaped = true;
  CHECK(r6_load_resistance(t) == 0.0);
  SimTrace none;
  CHECK(r6_load_resistance(none) == 0.0);
}

TEST_CASE("no contact means zero total") {
  SimTrace t;
  t.t_max = 5.0;
  t.bodies_total = 3;
  t.events.t_final = 5.0;
  const RewardBreakdown b = score(t, RewardWeights{});
  CHECK(b.total == 0.0);
  for (double r : b.r) CHECK(r == 0.0);
}

TEST_CASE("score sums the weighted components") {
  const SimTrace t = secured_trace();
  const RewardBreakdown b = score(t, RewardWeights{});
  CHECK(b.r[0] == 1.0);
  CHECK(b.r[1] == doctest::Approx(0.4));
  CHECK(b.r[4] == doctest::Approx(0.75));
  CHECK(b.total == doctest::Approx(combine(b.r, RewardWeights{})));
}

TEST_CASE("tension grid") {
  const auto grid = tension_grid({5, 10, 15}, 2);
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == std::vector<double>{5, 5});
  CHECK(grid[1] == std::vector<double>{5, 10});
  CHECK(grid.back() == std::vector<double>{15, 15});
  CHECK(tension_grid({5, 10, 15}, 3).size() == 27);
  CHECK(tension_grid({5}, 1).size() == 1);
}

TEST_CASE("simulation counts follow levels to the power of fingers") {
  const EvaluationSetup setup = small_setup({5, 10, 15}, {0});
  const DesignReward two = evaluate_design(two_finger_spec(), setup);
  CHECK(two.sim_count == 27);
  CHECK(two.per_object.size() == 3);

  const MechanismSpec three = compile(make_design({
      {{PalmSide::kBottom, -0.03, -30.0}, {{0.1, 0.08}}},
      {{PalmSide::kTop, 0.03, -30.0}, {{0.1, 0.08}}},
      {{PalmSide::kTop, 0.0, 30.0}, {{0.1, 0.05}}},
  }));
  CHECK(evaluate_design(three, setup).sim_count == 81);
  const EvaluationSetup two_orient = small_setup({5, 10, 15}, {0, 45});
  CHECK(evaluate_design(two_finger_spec(), two_orient).sim_count == 54);
}

TEST_CASE("final is the sum of per-object row maxima") {
  const EvaluationSetup setup = small_setup({5, 15}, {0, 45});
  const MechanismSpec spec = two_finger_spec();
  const DesignReward report = evaluate_design(spec, setup);

  SimConfig cfg = setup.sim;
  cfg.trace_decimation = 0;
  double expect_final = 0.0;
  for (const SimObject& o : setup.objects) {
    double best = -1.0;
    for (const auto& controls : tension_grid(setup.tension_levels_n, 2)) {
      double avg = 0.0;
      for (double deg : setup.orientations_deg) {
        SimObject turned = o;
        turned.initial_pose.theta += deg * std::numbers::pi / 180.0;
        avg += score(run_grasp(spec, turned, controls, cfg), setup.weights).total;
      }
      best = std::max(best, avg / 2.0);
    }
    CHECK(report.per_object.at(o.name).best_total == doctest::Approx(best).epsilon(1e-12));
    expect_final += best;
  }
  CHECK(report.final == doctest::Approx(expect_final).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& [name, r] : report.per_object) {
    sum += r.best_total;
    for (double c : r.breakdown.r) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    CHECK(r.breakdown.total == doctest::Approx(r.best_total));
  }
  CHECK(report.final == sum);
  CHECK(report.final >= 0.0);
  CHECK(report.final <= 3 * setup.weights.sum());
}

TEST_CASE("single object and tension gives that one reward") {
  EvaluationSetup setup = small_setup({10}, {0});
  setup.objects = {centred(SimObject::disc("disc", 0.03, 0.1))};
  const MechanismSpec spec = two_finger_spec();
  SimConfig cfg = setup.sim;
  cfg.trace_decimation = 0;
  const std::vector<double> t = {10.0, 10.0};
  const double direct = score(run_grasp(spec, setup.objects[0], t, cfg), setup.weights).total;
  const DesignReward report = evaluate_design(spec, setup);
  CHECK(report.final == direct);
  CHECK(report.sim_count == 1);
  CHECK(report.per_object.at("disc").best_controls == t);
}

TEST_CASE("level order does not change the result") {
  const MechanismSpec spec = two_finger_spec();
  const DesignReward a = evaluate_design(spec, small_setup({5, 10, 15}, {0}));
  const DesignReward b = evaluate_design(spec, small_setup({15, 5, 10}, {0}));
  CHECK(a.final == b.final);
  for (const auto& [name, r] : a.per_object) CHECK(r.best_total == b.per_object.at(name).best_total);
}

TEST_CASE("parallel and serial evaluation agree") {
  EvaluationSetup setup = small_setup({5, 10, 15}, {0, 45});
  setup.threads = 4;
  const MechanismSpec spec = two_finger_spec();
  const DesignReward par = evaluate_design(spec, setup);
  const DesignReward ser = evaluate_design_serial(spec, setup);
  CHECK(par.final == ser.final);
  CHECK(par.sim_count == ser.sim_count);
  for (const auto& [name, r] : par.per_object) {
    const ObjectReward& s = ser.per_object.at(name);
    CHECK(r.best_total == s.best_total);
    CHECK(r.best_controls == s.best_controls);
    CHECK(r.breakdown.r == s.breakdown.r);
  }
}

TEST_CASE("evaluation rejects empty inputs") {
  const MechanismSpec spec = two_finger_spec();
  CHECK_THROWS_AS(evaluate_design(spec, small_setup({}, {0})), ConfigError);
  CHECK_THROWS_AS(evaluate_design(spec, small_setup({5}, {})), ConfigError);
  EvaluationSetup none = small_setup({5}, {0});
  none.objects.clear();
  CHECK_THROWS_AS(evaluate_design(spec, none), ConfigError);
}

TEST_CASE("default object set") {
  const auto objects = default_objects();
  REQUIRE(objects.size() == 3);
  for (const SimObject& o : objects) {
    CHECK(o.mass_kg == 0.1);
    CHECK(o.initial_pose.x == default_workspace_center().x);
    CHECK(o.initial_pose.y == default_workspace_center().y);
  }
  CHECK(objects[0].kind == ShapeKind::kDisc);
  CHECK(objects[0].radius_m == 0.03);
  CHECK(objects[1].kind == ShapeKind::kRect);
  CHECK(objects[1].width_m == 0.05);
  CHECK(objects[2].sides == 6);
  CHECK(objects[2].radius_m == 0.035);
}
