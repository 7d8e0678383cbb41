// Copyright 2026 The ddopt Authors
//
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

#ifndef DDOPT_REPLANNER_HPP_
#define DDOPT_REPLANNER_HPP_

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ddopt/grid_world.hpp"
#include "ddopt/ms_trajectory.hpp"
#include "ddopt/optimizer.hpp"

namespace ddopt {

struct ReplanPolicy {
  double compute_time = 0.02;    // start state is taken this far ahead
  double search_window = 1.0;    // forward search for the last safe point
  double max_length = 8.0;       // global path truncation
  double relaxed_e_max = 0.1;    // final-position tolerance for truncated plans
  double rate = 12.5;            // ticks per second
  // A truncated plan is extended once less than this much time remains.
  double extend_margin = 2.0;
  double sample_dt = 0.05;       // resolution of the safe-point search
  // After a failed replan, stop only if the predicted collision is closer
  // than this; otherwise keep the trajectory and retry next tick.
  double brake_horizon = 1.0;
  int max_map_age = 2;           // ticks

  void Validate(double e_max) const;
  double period() const { return 1.0 / rate; }
};

// Trajectory placed on the global clock: local time = t - start_time.
struct TimedTrajectory {
  MsTrajectory traj;
  double start_time = 0.0;
  bool reaches_goal = true;  // false when planned on a truncated path

  double end_time() const { return start_time + traj.total_duration(); }
  double Local(double t) const;
};

enum class ReplanAction { kKeep, kSwitch, kEmergencyStop, kSkip };

std::string_view ToString(ReplanAction a);

struct ReplanOutcome {
  ReplanAction action = ReplanAction::kKeep;
  // Valid for kSwitch; becomes active at switch_time.
  std::optional<TimedTrajectory> trajectory;
  double switch_time = 0.0;
  bool attempted = false;
  bool truncated = false;
  SolveStatus status = SolveStatus::kFailed;
  double wall_ms = 0.0;
  double residual = 0.0;
  StageTimings timings;
  std::string reason;
};

struct ReplanInput {
  double now = 0.0;
  // Active trajectory, or null when the robot is at rest without a plan.
  const TimedTrajectory* current = nullptr;
  Pose robot_pose = Pose::Zero();  // used when current is null
  const EsdfMap* map = nullptr;
  int map_age = 0;                 // ticks since the map snapshot
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
};

// Earliest global time in [t_from, t_to] where the body origin comes closer
// than `radius` to an obstacle, sampled every dt.
std::optional<double> FirstCollision(const TimedTrajectory& traj, const EsdfMap& map,
                                     double radius, double t_from, double t_to, double dt);

// One planning decision. Keeps the current trajectory unless it collides with
// the latest map, a truncated plan is running out, or no plan exists.
ReplanOutcome ReplanTick(const ReplanInput& in, const ReplanPolicy& policy,
                         const ProblemConfig& cfg);

}  // namespace ddopt

#endif  // DDOPT_REPLANNER_HPP_
