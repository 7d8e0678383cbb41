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

#ifndef DDOPT_SIMULATION_HPP_
#define DDOPT_SIMULATION_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddopt/dd_kinematics.hpp"
#include "ddopt/grid_world.hpp"
#include "ddopt/optimizer.hpp"
#include "ddopt/replanner.hpp"
#include "ddopt/report_io.hpp"
#include "ddopt/tracker.hpp"

namespace ddopt {

// Box of cells that becomes occupied at `time`, or later once the robot
// is within trigger_distance of it (when trigger_distance > 0).
struct PopUpObstacle {
  double time = 0.0;
  double trigger_distance = 0.0;
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = Eigen::Vector2d::Zero();
};

struct Scenario {
  std::string name;
  OccupancyGrid truth;
  Pose start = Pose::Zero();
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  std::vector<PopUpObstacle> popups;
};

enum class ScenarioKind { kUShaped, kPopUp };
std::string_view ToString(ScenarioKind k);
ScenarioKind ParseScenarioKind(std::string_view name);

// U-shaped trap open towards the start, goal behind it. The seed jitters
// the start and goal laterally.
Scenario MakeUShapedScenario(std::uint64_t seed);
// Corridor with a wall segment that appears a few meters ahead of the
// robot, across the committed trajectory; the seed sets where and how close.
Scenario MakePopUpScenario(std::uint64_t seed);
Scenario MakeScenario(ScenarioKind kind, std::uint64_t seed);

struct SimulationConfig {
  double control_dt = 0.05;
  double time_limit = 60.0;
  double sensing_range = 7.0;
  double goal_tolerance = 0.3;
  // Standard deviation of additive wheel-speed noise (m/s).
  double actuation_noise = 0.0;
  // Reveal the full map at t = 0 instead of the sensing disk.
  bool known_map = false;
  // ICR of the simulated plant; the planner and controller use cfg.icr.
  IcrParams plant_icr;
  HorizonProblem tracker;
  ReplanPolicy policy;

  void Validate(const ProblemConfig& cfg) const;
};

struct SimulationResult {
  bool reached_goal = false;
  bool collided = false;
  double collision_time = -1.0;
  double final_time = 0.0;
  double mean_tracking_error = 0.0;
  double max_tracking_error = 0.0;
  int plans = 0;
  int switches = 0;
  int emergency_stops = 0;
  // t, x, y, theta, ref_x, ref_y, ref_theta, u0, u1, cost, status
  Table states;
  // tick, t, action, wall_ms, residual, truncated, status, reason
  Table events;
  // jps, preprocess, optimization, total (ms), one row per attempted plan
  Table timings;
  std::string message;
};

// Closed loop: sensing-disk reveal, ESDF rebuild, replanning, tracking and
// kinematic plant with the true ICR. Deterministic under `seed`.
SimulationResult RunClosedLoop(const Scenario& scenario, const ProblemConfig& cfg,
                               const SimulationConfig& sim, std::uint64_t seed);

struct TrackingResult {
  double mean_error = 0.0;
  double max_error = 0.0;
  double final_error = 0.0;
  int steps = 0;
};

// Tracks a fixed trajectory from its start pose with the plant ICR in
// sim.plant_icr and the controller model built on controller_icr.
TrackingResult TrackTrajectory(const MsTrajectory& traj, const SimulationConfig& sim,
                               const IcrParams& controller_icr, std::uint64_t seed);

}  // namespace ddopt

#endif  // DDOPT_SIMULATION_HPP_
