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

#ifndef DDOPT_OPTIMIZER_HPP_
#define DDOPT_OPTIMIZER_HPP_

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddopt/global_path.hpp"
#include "ddopt/grid_world.hpp"
#include "ddopt/lbfgs.hpp"
#include "ddopt/minco.hpp"
#include "ddopt/ms_trajectory.hpp"
#include "ddopt/penalties.hpp"

namespace ddopt {

// Smooth bijection between an unconstrained tau and a duration T > 0.
double TimeForward(double tau, double* dT_dtau = nullptr);
double TimeBackward(double duration);

struct AlmParams {
  double rho0 = 1e3;
  double growth = 1.0;  // rho <- min((1 + growth) rho, rho_max)
  double rho_max = 1e5;
  double e_max = 0.01;  // final-position tolerance, meters
  int max_outer = 12;
  // Penalty-weight multiplier applied when the endpoint converges with
  // sampled violations above max_violation, at most max_escalations times.
  double escalation = 10.0;
  int max_escalations = 3;
};

struct ProblemConfig {
  Limits limits;
  ConstraintWeights weights;
  AlmParams alm;
  LbfgsParams inner;
  LbfgsParams preprocess{.memory = 16, .g_tol = 1e-2, .f_tol = 1e-5, .past = 3,
                         .max_iterations = 120};
  IcrParams icr;
  Eigen::Vector2d energy_weight = Eigen::Vector2d::Ones();
  double time_weight = 32.0;
  int intervals = kDefaultIntervals;
  double segment_length = 1.0;
  double initial_duration = 0.8;
  double robot_radius = 0.2;
  // Feasibility tolerance for declaring success.
  double max_violation = 1e-3;
  double max_junction_residual = 1e-9;
  bool preprocess_enabled = true;

  void Validate() const;
};

enum class ObjectiveMode { kFull, kPreprocess };

// Objective over the decision vector
//   [waypoints (theta, s) column-major, tau (M), s_f].
class Objective {
 public:
  Objective(const ProblemConfig& cfg, const EsdfMap* esdf, const InitialGuess& guess,
            ObjectiveMode mode);

  int dimension() const { return 2 * (m_ - 1) + m_ + 1; }
  int segments() const { return m_; }

  Eigen::VectorXd Pack(const Eigen::Matrix2Xd& waypoints, const Eigen::VectorXd& durations,
                       double s_final) const;
  void Unpack(const Eigen::VectorXd& x, Eigen::Matrix2Xd* waypoints,
              Eigen::VectorXd* durations, double* s_final) const;

  // Returns J and fills grad (resized). Throws NonFinite naming the term
  // that produced a non-finite value.
  double Evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad);

  // Trajectory and cache of the most recent evaluation.
  const MsTrajectory& trajectory() const { return traj_; }
  const IntegrationCache& cache() const { return cache_; }
  MsTrajectory TrajectoryAt(const Eigen::VectorXd& x);

  void SetMultipliers(const Eigen::Vector2d& lambda, double rho) {
    lambda_ = lambda;
    rho_ = rho;
  }
  const Eigen::Vector2d& lambda() const { return lambda_; }
  double rho() const { return rho_; }
  const Eigen::Vector2d& last_residual() const { return residual_; }
  const PenaltyBreakdown& last_penalties() const { return penalties_; }
  double last_energy() const { return energy_; }

 private:
  const ProblemConfig& cfg_;
  const EsdfMap* esdf_;
  ObjectiveMode mode_;
  int m_;
  Eigen::Vector2d goal_;
  std::vector<Eigen::Vector2d> anchors_;
  Minco minco_;
  MsTrajectory traj_;
  IntegrationCache cache_;
  Eigen::Vector2d lambda_ = Eigen::Vector2d::Zero();
  double rho_ = 1.0;
  Eigen::Vector2d residual_ = Eigen::Vector2d::Zero();
  PenaltyBreakdown penalties_;
  double energy_ = 0.0;
  std::vector<Eigen::Vector2d> pos_grad_;
};

enum class SolveStatus {
  kSuccess,
  kIncomplete,  // final-position error still >= e_max
  kInfeasible,  // penalties not satisfied at exit
  kFailed,      // non-finite objective or other numerical failure
};

std::string_view ToString(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::kFailed;
  MsTrajectory trajectory;
  Eigen::VectorXd x;
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();
  double final_error = 0.0;
  MaxViolations violations;
  double junction_residual = 0.0;
  // Smallest ESDF value along a dense resampling (0.01 s), when a map is
  // available.
  double min_clearance = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int escalations = 0;
  int evaluations = 0;
  LbfgsStatus last_inner = LbfgsStatus::kMaxIterations;
  std::string message;
};

// One row per inner iteration for convergence plots.
struct IterationRecord {
  int outer = 0;
  int inner = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double residual = 0.0;
};
using IterationSink = std::function<void(const IterationRecord&)>;

// Largest continuity mismatch of derivatives 0..2 at the junctions.
double JunctionResidual(const MsTrajectory& traj);

// Dense clearance check: minimum ESDF value over samples every dt seconds.
double MinClearance(const MsTrajectory& traj, const IntegrationCache& cache,
                    const EsdfMap& esdf, double dt = 0.01);

// Short solve of energy + kinematic penalties + anchor term, without safety
// or final-position terms, with loose tolerances.
InitialGuess Preprocess(const InitialGuess& guess, const ProblemConfig& cfg);

// Augmented-Lagrangian solve of the full problem from `guess`.
SolveResult AlmSolve(const InitialGuess& guess, const ProblemConfig& cfg,
                     const EsdfMap* esdf, double e_max,
                     const IterationSink& sink = {});

struct StageTimings {
  double jps_ms = 0.0;
  double preprocess_ms = 0.0;
  double optimization_ms = 0.0;
  double total_ms = 0.0;
};

struct PlanRequest {
  Pose start = Pose::Zero();
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  SeedOptions seed;
  // Overrides cfg.alm.e_max when positive.
  double e_max = -1.0;
  // Optional prefix for the global path (e.g. a stretch of the current
  // trajectory during replanning); JPS then starts at its last point.
  std::vector<Eigen::Vector2d> path_prefix;
  // Truncate the global path to this length (0 = no truncation).
  double max_length = 0.0;
  // Tolerance used instead when the path was truncated (<= 0: unchanged).
  double truncated_e_max = -1.0;
};

struct PlanResult {
  SolveResult solve;
  GridPath path;
  InitialGuess seed;
  StageTimings timings;
  bool truncated = false;
};

// JPS on the grid inflated by robot_radius, seeding, preprocessing and the
// ALM solve. Throws NoPath when the global search fails.
PlanResult Plan(const EsdfMap& esdf, const PlanRequest& request, const ProblemConfig& cfg,
                const IterationSink& sink = {});

// Cuts a polyline at arc length max_length.
std::vector<Eigen::Vector2d> TruncatePolyline(const std::vector<Eigen::Vector2d>& points,
                                              double max_length);

}  // namespace ddopt

#endif  // DDOPT_OPTIMIZER_HPP_
