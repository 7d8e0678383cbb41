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

#include "ddopt/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "ddopt/error.hpp"

namespace ddopt {

std::string_view ToString(ScenarioKind k) {
  return k == ScenarioKind::kUShaped ? "u_shaped" : "popup";
}

ScenarioKind ParseScenarioKind(std::string_view name) {
  if (name == "u_shaped") return ScenarioKind::kUShaped;
  if (name == "popup") return ScenarioKind::kPopUp;
  throw Error(ErrorCode::kConfigError, "unknown scenario '" + std::string(name) + "'");
}

namespace {

void AddPerimeter(OccupancyGrid* g) {
  g->FillCells(0, 0, g->width(), 1);
  g->FillCells(0, g->height() - 1, g->width(), g->height());
  g->FillCells(0, 0, 1, g->height());
  g->FillCells(g->width() - 1, 0, g->width(), g->height());
}

}  // namespace

Scenario MakeUShapedScenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  Scenario s;
  s.name = "u_shaped";
  s.truth = OccupancyGrid(0.1, 300, 200);
  AddPerimeter(&s.truth);
  // Arms along y = 5.5 and y = 14.5, back wall at x = 16.
  s.truth.FillBox({10.0, 5.5}, {16.5, 6.0});
  s.truth.FillBox({10.0, 14.0}, {16.5, 14.5});
  s.truth.FillBox({16.0, 5.5}, {16.5, 14.5});
  s.start = Pose(3.0, 10.0 + jitter(rng), 0.0);
  s.goal = Eigen::Vector2d(25.0, 10.0 + 2.0 * jitter(rng));
  return s;
}

Scenario MakePopUpScenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Scenario s;
  s.name = "popup";
  s.truth = OccupancyGrid(0.1, 300, 140);
  AddPerimeter(&s.truth);
  // A few static boxes away from the centre line.
  s.truth.FillBox({8.0, 1.0}, {9.0, 3.0});
  s.truth.FillBox({18.0, 11.0}, {19.0, 13.0});
  s.start = Pose(2.0, 7.0, 0.0);
  s.goal = Eigen::Vector2d(27.0, 7.0);
  PopUpObstacle p;
  p.trigger_distance = 3.5 + u(rng);
  const double x0 = 12.0 + 2.0 * u(rng);
  const double yc = 7.0 + (u(rng) - 0.5);
  p.lo = Eigen::Vector2d(x0, yc - 1.5);
  p.hi = Eigen::Vector2d(x0 + 0.8, yc + 1.5);
  s.popups.push_back(p);
  return s;
}

Scenario MakeScenario(ScenarioKind kind, std::uint64_t seed) {
  return kind == ScenarioKind::kUShaped ? MakeUShapedScenario(seed) : MakePopUpScenario(seed);
}

void SimulationConfig::Validate(const ProblemConfig& cfg) const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "simulation: " + what);
  };
  if (!(control_dt > 0.0)) fail("control_dt must be > 0");
  if (!(time_limit > 0.0)) fail("time_limit must be > 0");
  if (!(sensing_range > 0.0)) fail("sensing_range must be > 0");
  if (!(goal_tolerance > 0.0)) fail("goal_tolerance must be > 0");
  if (!(actuation_noise >= 0.0)) fail("actuation_noise must be >= 0");
  if (!plant_icr.Valid()) fail("plant_icr must have y_il > y_ir");
  tracker.Validate();
  policy.Validate(cfg.alm.e_max);
}

namespace {

void Reveal(const OccupancyGrid& truth, const Pose& pose, double range,
            OccupancyGrid* known) {
  const double res = truth.resolution();
  const Eigen::Vector2i c = truth.WorldToCell(pose.head<2>());
  const int r = static_cast<int>(std::ceil(range / res));
  for (int iy = std::max(0, c.y() - r); iy <= std::min(truth.height() - 1, c.y() + r); ++iy) {
    for (int ix = std::max(0, c.x() - r); ix <= std::min(truth.width() - 1, c.x() + r); ++ix) {
      if ((truth.CellCenter(ix, iy) - pose.head<2>()).norm() <= range) {
        known->SetOccupied(ix, iy, truth.Occupied(ix, iy));
      }
    }
  }
}

// Controller input to plant wheel speeds.
WheelSpeeds InputWheels(const Tracker& tracker, const Eigen::Vector2d& u) {
  if (tracker.problem().model == TrackerModel::kWheel) return {u.x(), u.y()};
  return WheelsFromTwist(u.x(), u.y(), tracker.icr());
}

constexpr int kPlantSubsteps = 5;

}  // namespace

SimulationResult RunClosedLoop(const Scenario& scenario, const ProblemConfig& cfg,
                               const SimulationConfig& sim, std::uint64_t seed) {
  cfg.Validate();
  sim.Validate(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimulationResult res;
  res.states = Table({"t", "x", "y", "theta", "ref_x", "ref_y", "ref_theta", "u0", "u1",
                      "cost", "status"});
  res.events = Table({"tick", "t", "action", "wall_ms", "residual", "truncated", "status",
                      "reason"});
  res.timings = Table({"jps", "preprocess", "optimization", "total"});

  OccupancyGrid truth = scenario.truth;
  EsdfMap truth_esdf = BuildEsdf(truth);
  std::vector<bool> applied(scenario.popups.size(), false);
  OccupancyGrid known(truth.resolution(), truth.width(), truth.height(), truth.origin());
  if (sim.known_map) known = truth;

  Tracker tracker(sim.tracker, cfg.icr);
  std::optional<TimedTrajectory> active;
  std::optional<TimedTrajectory> pending;
  ReferenceTable table;

  Pose pose = scenario.start;
  double t = 0.0;
  double next_plan = 0.0;
  double err_sum = 0.0;
  int err_count = 0;
  int tick = 0;
  const double dt = sim.control_dt;

  for (; t <= sim.time_limit + 1e-9; ++tick) {
    // World events.
    bool truth_changed = false;
    for (std::size_t k = 0; k < scenario.popups.size(); ++k) {
      const PopUpObstacle& pu = scenario.popups[k];
      const Eigen::Vector2d gap =
          (pu.lo - pose.head<2>()).cwiseMax(pose.head<2>() - pu.hi).cwiseMax(0.0);
      const bool near = pu.trigger_distance <= 0.0 || gap.norm() <= pu.trigger_distance;
      if (!applied[k] && pu.time <= t + 1e-12 && near) {
        truth.FillBox(scenario.popups[k].lo, scenario.popups[k].hi);
        applied[k] = true;
        truth_changed = true;
      }
    }
    if (truth_changed) {
      truth_esdf = BuildEsdf(truth);
      if (sim.known_map) known = truth;
    }

    // Planning at the replan rate.
    if (t >= next_plan - 1e-9) {
      next_plan += sim.policy.period();
      Reveal(truth, pose, sim.sensing_range, &known);
      const EsdfMap map = BuildEsdf(known);
      ReplanInput in;
      in.now = t;
      const TimedTrajectory* cur = pending ? &*pending : (active ? &*active : nullptr);
      in.current = cur;
      in.robot_pose = pose;
      in.map = &map;
      in.goal = scenario.goal;
      const ReplanOutcome out = ReplanTick(in, sim.policy, cfg);
      if (out.attempted) {
        ++res.plans;
        res.timings.AddRow({out.timings.jps_ms, out.timings.preprocess_ms,
                            out.timings.optimization_ms, out.timings.total_ms});
      }
      if (out.action != ReplanAction::kKeep || out.attempted) {
        res.events.AddRow({static_cast<std::int64_t>(tick), t,
                           std::string(ToString(out.action)), out.wall_ms, out.residual,
                           static_cast<std::int64_t>(out.truncated),
                           std::string(out.attempted ? ToString(out.status) : "none"),
                           out.reason});
      }
      if (out.action == ReplanAction::kSwitch) {
        ++res.switches;
        pending = out.trajectory;
      } else if (out.action == ReplanAction::kEmergencyStop) {
        ++res.emergency_stops;
        active.reset();
        pending.reset();
        tracker.Reset();
      }
    }
    if (pending && t >= pending->start_time - 1e-12) {
      active = std::move(pending);
      pending.reset();
      table = ReferenceTable(active->traj);
    }

    // Control.
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    WheelSpeeds wheels{0.0, 0.0};
    ReferencePoint ref{pose, 0.0, 0.0};
    double cost = 0.0;
    std::string status = "stopped";
    if (active) {
      const double tl = t - active->start_time;
      const HorizonSolution sol = tracker.Solve(pose, tl, table);
      u = sol.u0;
      cost = sol.cost;
      status = sol.status == TrackerStatus::kOk ? "ok" : "degraded";
      wheels = InputWheels(tracker, u);
      ref = table.At(tl);
      const double e = (pose.head<2>() - ref.pose.head<2>()).norm();
      err_sum += e;
      ++err_count;
      res.max_tracking_error = std::max(res.max_tracking_error, e);
    }
    res.states.AddRow({t, pose.x(), pose.y(), pose.z(), ref.pose.x(), ref.pose.y(),
                       ref.pose.z(), u.x(), u.y(), cost, status});

    // Goal check.
    if ((pose.head<2>() - scenario.goal).norm() < sim.goal_tolerance && active &&
        active->reaches_goal && t >= active->end_time() - 1e-9) {
      res.reached_goal = true;
      break;
    }

    // Plant.
    if (active && sim.actuation_noise > 0.0) {
      wheels.left += sim.actuation_noise * noise(rng);
      wheels.right += sim.actuation_noise * noise(rng);
    }
    const Twist tw = TwistFromWheels(wheels, sim.plant_icr);
    for (int k = 0; k < kPlantSubsteps; ++k) {
      pose = Step(pose, tw, dt / kPlantSubsteps);
      if (truth_esdf.Query(pose.head<2>()).value < cfg.robot_radius) {
        res.collided = true;
        res.collision_time = t + (k + 1) * dt / kPlantSubsteps;
        break;
      }
    }
    t += dt;
    if (res.collided) break;
  }

  res.final_time = t;
  res.mean_tracking_error = err_count > 0 ? err_sum / err_count : 0.0;
  if (res.collided) {
    res.message = "collision at t=" + std::to_string(res.collision_time);
  } else if (!res.reached_goal) {
    res.message = "time limit reached";
  }
  return res;
}

TrackingResult TrackTrajectory(const MsTrajectory& traj, const SimulationConfig& sim,
                               const IcrParams& controller_icr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Tracker tracker(sim.tracker, controller_icr);
  const ReferenceTable table(traj);
  TrackingResult out;
  Pose pose = traj.start_pose();
  const double dt = sim.control_dt;
  const int steps = static_cast<int>(std::ceil(traj.total_duration() / dt));
  double sum = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const double e = (pose.head<2>() - table.At(t).pose.head<2>()).norm();
    sum += e;
    out.max_error = std::max(out.max_error, e);
    out.final_error = e;
    if (k == steps) break;
    const HorizonSolution sol = tracker.Solve(pose, t, table);
    WheelSpeeds w = InputWheels(tracker, sol.u0);
    if (sim.actuation_noise > 0.0) {
      w.left += sim.actuation_noise * noise(rng);
      w.right += sim.actuation_noise * noise(rng);
    }
    pose = Step(pose, TwistFromWheels(w, sim.plant_icr), dt);
  }
  out.steps = steps + 1;
  out.mean_error = sum / out.steps;
  return out;
}

}  // namespace ddopt
