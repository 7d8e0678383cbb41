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

#include "ddopt/replanner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ddopt/error.hpp"

namespace ddopt {

void ReplanPolicy::Validate(double e_max) const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "policy: " + what);
  };
  if (!(compute_time > 0.0)) fail("compute_time must be > 0");
  if (!(search_window >= 0.0)) fail("search_window must be >= 0");
  if (!(max_length > 0.0)) fail("max_length must be > 0");
  if (!(relaxed_e_max >= e_max)) fail("relaxed_e_max must be >= e_max");
  if (!(rate > 0.0)) fail("rate must be > 0");
  if (!(sample_dt > 0.0)) fail("sample_dt must be > 0");
  if (!(brake_horizon >= 0.0)) fail("brake_horizon must be >= 0");
  if (max_map_age < 0) fail("max_map_age must be >= 0");
}

double TimedTrajectory::Local(double t) const {
  return std::clamp(t - start_time, 0.0, traj.total_duration());
}

std::string_view ToString(ReplanAction a) {
  switch (a) {
    case ReplanAction::kKeep: return "keep";
    case ReplanAction::kSwitch: return "switch";
    case ReplanAction::kEmergencyStop: return "emergency_stop";
    case ReplanAction::kSkip: return "skip";
  }
  return "unknown";
}

namespace {

std::vector<double> SampleTimes(double t_from, double t_to, double dt) {
  std::vector<double> ts;
  if (t_to < t_from) return ts;
  const int n = static_cast<int>(std::ceil((t_to - t_from) / dt - 1e-9));
  for (int k = 0; k <= n; ++k) ts.push_back(std::min(t_from + k * dt, t_to));
  return ts;
}

}  // namespace

std::optional<double> FirstCollision(const TimedTrajectory& tt, const EsdfMap& map,
                                     double radius, double t_from, double t_to, double dt) {
  const IntegrationCache cache = IntegratePositions(tt.traj);
  for (double t : SampleTimes(t_from, std::min(t_to, tt.end_time()), dt)) {
    const Eigen::Vector2d p = PositionAt(tt.traj, cache, tt.Local(t));
    if (map.Query(p).value < radius) return t;
  }
  return std::nullopt;
}

ReplanOutcome ReplanTick(const ReplanInput& in, const ReplanPolicy& policy,
                         const ProblemConfig& cfg) {
  ReplanOutcome out;
  if (in.map == nullptr) throw Error(ErrorCode::kInvalidArgument, "replan needs a map");
  if (in.map_age > policy.max_map_age) {
    out.action = ReplanAction::kSkip;
    out.reason = "map snapshot is stale";
    return out;
  }
  const EsdfMap& map = *in.map;
  const double t_r = in.now + policy.compute_time;

  PlanRequest req;
  req.goal = in.goal;
  req.max_length = policy.max_length;
  req.e_max = cfg.alm.e_max;
  req.truncated_e_max = policy.relaxed_e_max;
  bool in_danger = false;  // collision predicted within the brake horizon

  if (in.current == nullptr) {
    req.start = in.robot_pose;
    out.switch_time = in.now;
    out.reason = "no active trajectory";
  } else {
    const TimedTrajectory& cur = *in.current;
    const std::optional<double> hit =
        FirstCollision(cur, map, cfg.robot_radius, in.now, cur.end_time(), policy.sample_dt);
    const bool running_out =
        !cur.reaches_goal && cur.end_time() - in.now < policy.extend_margin;
    if (!hit && !running_out) {
      out.reason = "current trajectory is safe";
      return out;
    }
    in_danger = hit && *hit - in.now <= policy.brake_horizon;
    out.reason = hit ? "collision ahead" : "extending truncated plan";
    if (hit && *hit <= t_r) {
      out.action = ReplanAction::kEmergencyStop;
      out.reason = "collision before the replan start";
      return out;
    }

    // Start state at t_R and the safe stretch of the current trajectory.
    const IntegrationCache cache = IntegratePositions(cur.traj);
    const double lr = cur.Local(t_r);
    const MotionState st = EvalState(cur.traj, lr, 2);
    req.start = PoseAt(cur.traj, cache, lr);
    req.seed.start_yaw_rate = st(1, 0);
    req.seed.start_yaw_accel = st(2, 0);
    req.seed.start_speed = st(1, 1);
    req.seed.start_accel = st(2, 1);
    out.switch_time = t_r;

    const double t_j = std::min(t_r + policy.search_window, cur.end_time());
    req.path_prefix.push_back(req.start.head<2>());
    for (double t : SampleTimes(t_r, t_j, policy.sample_dt)) {
      if (t == t_r) continue;
      const Eigen::Vector2d p = PositionAt(cur.traj, cache, cur.Local(t));
      if (map.Query(p).value < cfg.robot_radius) break;
      if ((p - req.path_prefix.back()).norm() > 1e-6) req.path_prefix.push_back(p);
    }
    if (req.path_prefix.size() < 2) req.path_prefix.clear();
  }

  out.attempted = true;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const PlanResult plan = Plan(map, req, cfg);
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.timings = plan.timings;
    out.truncated = plan.truncated;
    out.status = plan.solve.status;
    out.residual = plan.solve.final_error;
    if (plan.solve.status == SolveStatus::kSuccess) {
      out.action = ReplanAction::kSwitch;
      out.trajectory = TimedTrajectory{plan.solve.trajectory, out.switch_time, !plan.truncated};
      return out;
    }
    out.reason += std::string("; solve ") + std::string(ToString(plan.solve.status));
  } catch (const Error& e) {
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.reason += std::string("; ") + e.what();
  }
  out.action = in_danger ? ReplanAction::kEmergencyStop : ReplanAction::kKeep;
  return out;
}

}  // namespace ddopt
