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

#ifndef DDOPT_PENALTIES_HPP_
#define DDOPT_PENALTIES_HPP_

#include <array>
#include <vector>

#include <Eigen/Core>

#include "ddopt/grid_world.hpp"
#include "ddopt/ms_trajectory.hpp"

namespace ddopt {

// Kinematic and geometric limits. v_min is the signed maximum reverse speed
// (<= 0; 0 forbids reversing).
struct Limits {
  double v_max = 3.0;
  double v_min = -3.0;
  double omega_max = 4.0;
  double a_max = 3.0;
  double alpha_max = 4.0;
  double safety_distance = 0.3;
  double eps_low = 0.5;
  double eps_upp = 2.0;
  // Body-frame contour points checked against the ESDF.
  std::vector<Eigen::Vector2d> contour = {Eigen::Vector2d::Zero()};

  // Throws ConfigError describing the first violated invariant.
  void Validate() const;
};

// Contour for a rectangular body: 4 corners and 4 edge midpoints.
std::vector<Eigen::Vector2d> RectangleContour(double length, double width);

// Penalty weights per constraint family.
struct ConstraintWeights {
  double velocity = 1e4;
  double accel = 1e4;
  double yaw_accel = 1e4;
  double safety = 1e4;
  double duration = 1e4;
  double anchor = 1e4;
};

// Smoothing width of the relaxation.
constexpr double kRelaxWidth = 1e-3;

struct Relaxed {
  double value = 0.0;
  double slope = 0.0;
};
// C2 relaxation of max(x, 0): cubic-quartic blend on (0, delta], then
// x - delta / 2.
Relaxed RelaxL1(double x, double delta = kRelaxWidth);

// Velocity / yaw-rate envelope. For eta in {-1, +1} (index 0, 1):
//   forward[k] = eta w v_M + w_M v - v_M w_M
//   reverse[k] = -eta w v_Mbar - w_M v + v_Mbar w_M
struct CouplingViolations {
  std::array<double, 2> forward{};
  std::array<double, 2> reverse{};
};
CouplingViolations VelocityCoupling(double v, double omega, const Limits& limits);

struct AccelViolations {
  double linear = 0.0;  // s''^2 - a_M^2
  double yaw = 0.0;     // theta''^2 - alpha_M^2
};
AccelViolations AccelPenalties(double s_acc, double theta_acc, const Limits& limits);

// d_s - E(p + R(theta) chi) for each contour point, with gradient in
// (x, y, theta).
struct SafetyViolation {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  bool clamped = false;
};
std::vector<SafetyViolation> SafetyPenalty(const Pose& pose, const EsdfMap& esdf,
                                           const Limits& limits);

// Per segment lower/upper balance violations; jacobian rows are
// [low_0..low_{M-1}, upp_0..upp_{M-1}] against T.
struct DurationViolations {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd jacobian;
};
DurationViolations DurationBalance(const Eigen::VectorXd& durations,
                                   const Limits& limits);

// Which families Accumulate evaluates.
struct PenaltyMask {
  bool velocity = true;
  bool accel = true;
  bool safety = true;
  bool duration = true;
};

struct PenaltyBreakdown {
  double velocity = 0.0;
  double accel = 0.0;
  double yaw_accel = 0.0;
  double safety = 0.0;
  double duration = 0.0;
  double total() const { return velocity + accel + yaw_accel + safety + duration; }
};

// Sampled penalty functional. Constraints are sampled at local times
// (j / n) T_i, j = 0..n, weighted by w_d (T_i / n) nu_j with trapezoid
// coefficients nu. Gradients are added to d_coeffs / d_durations; position
// gradients (safety) are added to pos_grad in IntegrationCache::position
// layout and must be back-propagated by the caller via BackpropPositions.
// esdf may be null when the mask disables safety.
PenaltyBreakdown Accumulate(const MsTrajectory& traj, const IntegrationCache& cache,
                            const EsdfMap* esdf, const ConstraintWeights& weights,
                            const Limits& limits, const PenaltyMask& mask,
                            Eigen::MatrixX2d* d_coeffs, Eigen::VectorXd* d_durations,
                            std::vector<Eigen::Vector2d>* pos_grad);

// Largest sampled violation per family (<= 0 means feasible), on the same
// grid Accumulate uses.
struct MaxViolations {
  double velocity = -1e300;
  double accel = -1e300;
  double yaw_accel = -1e300;
  double safety = -1e300;
  double duration = -1e300;
  double Worst() const;
};
MaxViolations SampledViolations(const MsTrajectory& traj, const IntegrationCache& cache,
                                const EsdfMap* esdf, const Limits& limits);

// x_f - goal; its gradient with respect to the final position is identity.
Eigen::Vector2d FinalPositionResidual(const IntegrationCache& cache,
                                      const Eigen::Vector2d& goal);

// Sum of squared distances from each segment end to its anchor. Adds the
// position gradients to pos_grad when non-null.
double AnchorPenalty(const IntegrationCache& cache,
                     const std::vector<Eigen::Vector2d>& anchors,
                     std::vector<Eigen::Vector2d>* pos_grad);

}  // namespace ddopt

#endif  // DDOPT_PENALTIES_HPP_
