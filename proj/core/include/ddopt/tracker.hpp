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

#ifndef DDOPT_TRACKER_HPP_
#define DDOPT_TRACKER_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddopt/dd_kinematics.hpp"
#include "ddopt/ms_trajectory.hpp"

namespace ddopt {

struct ReferencePoint {
  Pose pose = Pose::Zero();
  double v = 0.0;      // s'
  double omega = 0.0;  // theta'
};

// Poses pre-integrated every `interval` seconds; lookups integrate forward
// from the nearest earlier sample. Holds the final pose with zero twist past
// the end of the trajectory.
class ReferenceTable {
 public:
  static constexpr double kDefaultInterval = 0.1;

  ReferenceTable() = default;
  explicit ReferenceTable(const MsTrajectory& traj, double interval = kDefaultInterval);

  double interval() const { return interval_; }
  double duration() const { return traj_.total_duration(); }
  std::uint64_t source_version() const { return version_; }
  const std::vector<Pose>& samples() const { return samples_; }
  const MsTrajectory& trajectory() const { return traj_; }

  ReferencePoint At(double t) const;

 private:
  MsTrajectory traj_;
  double interval_ = kDefaultInterval;
  std::uint64_t version_ = 0;
  std::vector<Pose> samples_;
};

// Position displacement over [t0, t1] by composite Simpson with `per_piece`
// intervals on each polynomial piece the span touches.
Eigen::Vector2d IntegrateSpan(const MsTrajectory& traj, double t0, double t1,
                              int per_piece = 8);

enum class TrackerModel { kTwist, kWheel };

std::string_view ToString(TrackerModel m);
TrackerModel ParseTrackerModel(std::string_view name);

// Finite-horizon tracking problem. Inputs are (v, omega) for the twist model
// and (v_left, v_right) for the wheel model.
struct HorizonProblem {
  double horizon = 1.5;
  double dt = 0.05;
  Eigen::Vector3d w_pose = Eigen::Vector3d(10.0, 10.0, 4.0);
  Eigen::Vector2d w_input = Eigen::Vector2d(0.1, 0.1);
  Eigen::Vector2d u_min = Eigen::Vector2d(-3.0, -4.0);
  Eigen::Vector2d u_max = Eigen::Vector2d(3.0, 4.0);
  TrackerModel model = TrackerModel::kTwist;
  int max_iterations = 40;
  int memory = 8;

  int steps() const;
  void Validate() const;
};

enum class TrackerStatus { kOk, kDegraded };

struct HorizonSolution {
  std::vector<Eigen::Vector2d> inputs;
  Eigen::Vector2d u0 = Eigen::Vector2d::Zero();
  double cost = 0.0;
  int iterations = 0;
  TrackerStatus status = TrackerStatus::kOk;
  // Cost after every accepted iterate, starting with the warm start.
  std::vector<double> cost_history;
};

// Receding-horizon tracker solved by single shooting with projected
// quasi-Newton steps. Keeps the previous solution for warm starts.
class Tracker {
 public:
  Tracker(const HorizonProblem& problem, const IcrParams& icr);

  const HorizonProblem& problem() const { return problem_; }
  void SetIcr(const IcrParams& icr) { icr_ = icr; }
  const IcrParams& icr() const { return icr_; }
  void Reset() { warm_.clear(); }

  // Body twist produced by an input under the model.
  Twist InputTwist(const Eigen::Vector2d& u) const;
  // Input that reproduces the reference (v, omega).
  Eigen::Vector2d ReferenceInput(double v, double omega) const;

  // Rollout cost of an input sequence from `current` at table time t0, with
  // its gradient when grad is non-null.
  double Cost(const Pose& current, double t0, const ReferenceTable& table,
              const std::vector<Eigen::Vector2d>& inputs,
              std::vector<Eigen::Vector2d>* grad) const;

  HorizonSolution Solve(const Pose& current, double t0, const ReferenceTable& table);

 private:
  Eigen::Matrix<double, 3, 2> TwistInputJacobian() const;
  Eigen::Vector2d Project(const Eigen::Vector2d& u) const;
  std::vector<ReferencePoint> References(double t0, const ReferenceTable& table) const;
  double RolloutCost(const Pose& current, const std::vector<ReferencePoint>& refs,
                     const std::vector<Eigen::Vector2d>& inputs,
                     std::vector<Eigen::Vector2d>* grad) const;

  HorizonProblem problem_;
  IcrParams icr_;
  std::vector<Eigen::Vector2d> warm_;
  Eigen::Vector2d last_u0_ = Eigen::Vector2d::Zero();
};

}  // namespace ddopt

#endif  // DDOPT_TRACKER_HPP_
