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

#include <atomic>
#include <exception>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "graspgen/errors.hpp"
#include "graspgen/reward.hpp"

namespace graspgen {

std::vector<std::vector<double>> tension_grid(const std::vector<double>& levels, int fingers) {
  std::vector<std::vector<double>> out;
  if (levels.empty() || fingers < 0) return out;
  std::vector<std::size_t> idx(fingers, 0);
  while (true) {
    std::vector<double> row(fingers);
    for (int f = 0; f < fingers; ++f) row[f] = levels[idx[f]];
    out.push_back(std::move(row));
    int f = fingers - 1;
    while (f >= 0 && ++idx[f] == levels.size()) idx[f--] = 0;
    if (f < 0) break;
  }
  return out;
}

namespace {

struct Job {
  std::size_t object;
  std::size_t controls;
  std::size_t orientation;
};

class Evaluation {
 public:
  Evaluation(const MechanismSpec& spec, const EvaluationSetup& setup, std::uint64_t seed)
      : spec_(spec), setup_(setup), seed_(seed) {
    if (setup.objects.empty()) throw ConfigError("evaluation needs at least one object");
    if (setup.tension_levels_n.empty()) throw ConfigError("evaluation needs a tension level");
    if (setup.orientations_deg.empty()) throw ConfigError("evaluation needs an orientation");
    setup.sim.check();
    for (const auto& o : setup.objects) o.check();
    grid_ = tension_grid(setup.tension_levels_n, static_cast<int>(spec.fingers.size()));
    for (std::size_t o = 0; o < setup.objects.size(); ++o) {
      for (std::size_t c = 0; c < grid_.size(); ++c) {
        for (std::size_t r = 0; r < setup.orientations_deg.size(); ++r) jobs_.push_back({o, c, r});
      }
    }
    results_.resize(jobs_.size());
    errors_.resize(jobs_.size());
    sim_cfg_ = setup.sim;
    // Rewards only need events and summaries.
    sim_cfg_.trace_decimation = 0;
  }

  std::size_t size() const { return jobs_.size(); }

  // Safe to call concurrently for distinct indices.
  void run(std::size_t i) {
    const Job& job = jobs_[i];
    try {
      SimObject object = setup_.objects[job.object];
      object.initial_pose.theta += setup_.orientations_deg[job.orientation] * std::numbers::pi / 180.0;
      const SimTrace trace = run_grasp(spec_, object, grid_[job.controls], sim_cfg_, seed_);
      count_.fetch_add(1, std::memory_order_relaxed);
      results_[i] = score(trace, setup_.weights);
    } catch (...) {
      errors_[i] = std::current_exception();
    }
  }

  DesignReward finish() const {
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      if (!errors_[i]) continue;
      const Job& job = jobs_[i];
      std::ostringstream os;
      os << "object '" << setup_.objects[job.object].name << "', orientation "
         << setup_.orientations_deg[job.orientation] << " deg, tensions [";
      for (std::size_t f = 0; f < grid_[job.controls].size(); ++f) {
        os << (f ? "," : "") << grid_[job.controls][f];
      }
      os << "] N";
      try {
        std::rethrow_exception(errors_[i]);
      } catch (const Diverged& e) {
        throw Diverged(os.str() + ": " + e.what(), e.step());
      }
    }

    DesignReward out;
    const std::size_t n_orient = setup_.orientations_deg.size();
    for (std::size_t o = 0; o < setup_.objects.size(); ++o) {
      ObjectReward best;
      bool have = false;
      for (std::size_t c = 0; c < grid_.size(); ++c) {
        RewardBreakdown avg;
        for (std::size_t r = 0; r < n_orient; ++r) {
          const RewardBreakdown& b = results_[(o * grid_.size() + c) * n_orient + r];
          for (std::size_t k = 0; k < 6; ++k) avg.r[k] += b.r[k] / n_orient;
        }
        avg.total = combine(avg.r, setup_.weights);
        if (!have || avg.total > best.best_total) {
          best.best_total = avg.total;
          best.best_controls = grid_[c];
          best.breakdown = avg;
          have = true;
        }
      }
      out.final += best.best_total;
      out.per_object[setup_.objects[o].name] = std::move(best);
    }
    out.sim_count = count_.load();
    return out;
  }

 private:
  const MechanismSpec& spec_;
  const EvaluationSetup& setup_;
  std::uint64_t seed_;
  SimConfig sim_cfg_;
  std::vector<std::vector<double>> grid_;
  std::vector<Job> jobs_;
  std::vector<RewardBreakdown> results_;
  std::vector<std::exception_ptr> errors_;
  std::atomic<std::int64_t> count_{0};
};

}  // namespace

DesignReward evaluate_design(const MechanismSpec& spec, const EvaluationSetup& setup,
                             std::uint64_t seed) {
  Evaluation eval(spec, setup, seed);
  const auto n = static_cast<std::int64_t>(eval.size());
  const int threads = setup.threads > 0 ? setup.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    eval.run(static_cast<std::size_t>(i));
  }
  return eval.finish();
}

DesignReward evaluate_design_serial(const MechanismSpec& spec, const EvaluationSetup& setup,
                                    std::uint64_t seed) {
  Evaluation eval(spec, setup, seed);
  for (std::size_t i = 0; i < eval.size(); ++i) eval.run(i);
  return eval.finish();
}

}  // namespace graspgen
