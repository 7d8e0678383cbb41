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

#include "ddopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {

double TimeForward(double tau, double* dT_dtau) {
  if (tau >= 0.0) {
    if (dT_dtau != nullptr) *dT_dtau = tau + 1.0;
    return ((tau + 1.0) * (tau + 1.0) + 1.0) / 2.0;
  }
  const double den = (1.0 - tau) * (1.0 - tau) + 1.0;
  if (dT_dtau != nullptr) *dT_dtau = 4.0 * (1.0 - tau) / (den * den);
  return 2.0 / den;
}

double TimeBackward(double duration) {
  if (!(duration > 0.0)) {
    throw Error(ErrorCode::kInvalidDuration, "duration must be positive");
  }
  return duration > 1.0 ? std::sqrt(2.0 * duration - 1.0) - 1.0
                        : 1.0 - std::sqrt(2.0 / duration - 1.0);
}

void ProblemConfig::Validate() const {
  limits.Validate();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "solver: " + what);
  };
  if (!(alm.rho0 > 0.0)) fail("rho0 must be > 0");
  if (!(alm.growth > 0.0)) fail("rho growth must be > 0");
  if (!(alm.rho_max >= alm.rho0)) fail("rho_max must be >= rho0");
  if (!(alm.e_max > 0.0)) fail("e_max must be > 0");
  if (alm.max_outer < 1) fail("max_outer must be >= 1");
  if (!(alm.escalation >= 1.0)) fail("escalation must be >= 1");
  if (alm.max_escalations < 0) fail("max_escalations must be >= 0");
  if (inner.memory < 1 || inner.max_iterations < 1) fail("bad inner L-BFGS settings");
  if (!(time_weight >= 0.0)) fail("time_weight must be >= 0");
  if ((energy_weight.array() < 0.0).any()) fail("energy weights must be >= 0");
  if (intervals < 1) fail("intervals must be >= 1");
  if (!(segment_length > 0.0)) fail("segment_length must be > 0");
  if (!(initial_duration > 0.0)) fail("initial_duration must be > 0");
  if (!(robot_radius >= 0.0)) fail("robot_radius must be >= 0");
  for (double w : {weights.velocity, weights.accel, weights.yaw_accel, weights.safety,
                   weights.duration, weights.anchor}) {
    if (!(w >= 0.0)) fail("penalty weights must be >= 0");
  }
  if (!icr.Valid()) fail("icr requires y_il > y_ir");
}

Objective::Objective(const ProblemConfig& cfg, const EsdfMap* esdf,
                     const InitialGuess& guess, ObjectiveMode mode)
    : cfg_(cfg),
      esdf_(esdf),
      mode_(mode),
      m_(guess.segments()),
      goal_(guess.goal),
      anchors_(guess.anchors) {
  if (m_ < 1 || guess.waypoints.cols() != m_ - 1) {
    throw Error(ErrorCode::kShapeError, "initial guess has inconsistent segment counts");
  }
  minco_.Setup(guess.bc, m_);
  traj_ = MsTrajectory(Eigen::MatrixX2d::Zero(6 * m_, 2), guess.durations,
                       guess.start_pose, cfg.icr);
  rho_ = cfg.alm.rho0;
}

Eigen::VectorXd Objective::Pack(const Eigen::Matrix2Xd& waypoints,
                                const Eigen::VectorXd& durations, double s_final) const {
  Eigen::VectorXd x(dimension());
  for (int i = 0; i < m_ - 1; ++i) {
    x(2 * i) = waypoints(0, i);
    x(2 * i + 1) = waypoints(1, i);
  }
  for (int i = 0; i < m_; ++i) x(2 * (m_ - 1) + i) = TimeBackward(durations(i));
  x(dimension() - 1) = s_final;
  return x;
}

void Objective::Unpack(const Eigen::VectorXd& x, Eigen::Matrix2Xd* waypoints,
                       Eigen::VectorXd* durations, double* s_final) const {
  waypoints->resize(2, m_ - 1);
  for (int i = 0; i < m_ - 1; ++i) {
    (*waypoints)(0, i) = x(2 * i);
    (*waypoints)(1, i) = x(2 * i + 1);
  }
  durations->resize(m_);
  for (int i = 0; i < m_; ++i) (*durations)(i) = TimeForward(x(2 * (m_ - 1) + i));
  *s_final = x(dimension() - 1);
}

double Objective::Evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  if (x.size() != dimension()) {
    throw Error(ErrorCode::kShapeError, "decision vector has the wrong size");
  }
  Eigen::Matrix2Xd wp;
  Eigen::VectorXd durations(m_), dtau(m_);
  for (int i = 0; i < m_; ++i) durations(i) = TimeForward(x(2 * (m_ - 1) + i), &dtau(i));
  wp.resize(2, m_ - 1);
  for (int i = 0; i < m_ - 1; ++i) {
    wp(0, i) = x(2 * i);
    wp(1, i) = x(2 * i + 1);
  }
  const double s_final = x(dimension() - 1);

  minco_.Generate(wp, s_final, durations);
  traj_.Set(minco_.coeffs(), durations);
  cache_ = IntegratePositions(traj_, cfg_.intervals);

  Eigen::MatrixX2d dc = Eigen::MatrixX2d::Zero(6 * m_, 2);
  Eigen::VectorXd dT = Eigen::VectorXd::Zero(m_);
  pos_grad_.assign(cache_.position_count(), Eigen::Vector2d::Zero());

  energy_ = minco_.Energy(cfg_.energy_weight);
  minco_.AddEnergyGradient(cfg_.energy_weight, &dc, &dT);
  double cost = energy_ + cfg_.time_weight * durations.sum();
  dT.array() += cfg_.time_weight;
  if (!std::isfinite(cost)) {
    throw Error(ErrorCode::kNonFinite, "non-finite control effort");
  }

  PenaltyMask mask;
  mask.safety = mode_ == ObjectiveMode::kFull && esdf_ != nullptr;
  penalties_ = Accumulate(traj_, cache_, esdf_, cfg_.weights, cfg_.limits, mask, &dc, &dT,
                          &pos_grad_);
  cost += penalties_.total();
  if (!std::isfinite(penalties_.total())) {
    throw Error(ErrorCode::kNonFinite, "non-finite constraint penalty");
  }

  residual_ = FinalPositionResidual(cache_, goal_);
  if (mode_ == ObjectiveMode::kFull) {
    const Eigen::Vector2d shifted = residual_ + lambda_ / rho_;
    cost += 0.5 * rho_ * shifted.squaredNorm();
    pos_grad_.back() += rho_ * shifted;
  } else {
    std::vector<Eigen::Vector2d> anchor_grad(cache_.position_count(), Eigen::Vector2d::Zero());
    cost += cfg_.weights.anchor * AnchorPenalty(cache_, anchors_, &anchor_grad);
    for (std::size_t k = 0; k < anchor_grad.size(); ++k) {
      pos_grad_[k] += cfg_.weights.anchor * anchor_grad[k];
    }
  }
  if (!std::isfinite(cost)) {
    throw Error(ErrorCode::kNonFinite, "non-finite final-position term");
  }

  if (grad != nullptr) {
    BackpropPositions(traj_, cache_, pos_grad_, &dc, &dT);
    Eigen::Matrix2Xd dwp;
    Eigen::VectorXd dT_total;
    double ds_final = 0.0;
    minco_.Backprop(dc, dT, &dwp, &dT_total, &ds_final);
    grad->resize(dimension());
    for (int i = 0; i < m_ - 1; ++i) {
      (*grad)(2 * i) = dwp(0, i);
      (*grad)(2 * i + 1) = dwp(1, i);
    }
    for (int i = 0; i < m_; ++i) (*grad)(2 * (m_ - 1) + i) = dT_total(i) * dtau(i);
    (*grad)(dimension() - 1) = ds_final;
    if (!grad->allFinite()) {
      for (int i = 0; i < m_; ++i) {
        if (!std::isfinite(dT_total(i))) {
          throw Error(ErrorCode::kNonFinite,
                      "non-finite duration gradient in segment " + std::to_string(i));
        }
      }
      throw Error(ErrorCode::kNonFinite, "non-finite gradient");
    }
  }
  return cost;
}

MsTrajectory Objective::TrajectoryAt(const Eigen::VectorXd& x) {
  Evaluate(x, nullptr);
  return traj_;
}

std::string_view ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kSuccess: return "success";
    case SolveStatus::kIncomplete: return "incomplete";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kFailed: return "failed";
  }
  return "unknown";
}

double JunctionResidual(const MsTrajectory& traj) {
  double worst = 0.0;
  for (int i = 0; i + 1 < traj.segments(); ++i) {
    const MotionState a = traj.EvalSegment(i, traj.durations()(i), 2);
    const MotionState b = traj.EvalSegment(i + 1, 0.0, 2);
    worst = std::max(worst, (a.topRows<3>() - b.topRows<3>()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double MinClearance(const MsTrajectory& traj, const IntegrationCache& cache,
                    const EsdfMap& esdf, double dt) {
  double best = std::numeric_limits<double>::infinity();
  const double total = traj.total_duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(total / dt)));
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(total, k * dt);
    best = std::min(best, esdf.Query(PositionAt(traj, cache, t)).value);
  }
  return best;
}

namespace {

// Adapts the throwing objective to L-BFGS, which treats +inf as a step
// that is too long.
ObjectiveFn Wrap(Objective* obj) {
  return [obj](const Eigen::VectorXd& x, Eigen::VectorXd* g) -> double {
    try {
      return obj->Evaluate(x, g);
    } catch (const Error&) {
      g->setConstant(std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::infinity();
    }
  };
}

InitialGuess FromVector(const InitialGuess& base, const Objective& obj,
                        const Eigen::VectorXd& x) {
  InitialGuess out = base;
  obj.Unpack(x, &out.waypoints, &out.durations, &out.s_final);
  return out;
}

}  // namespace

InitialGuess Preprocess(const InitialGuess& guess, const ProblemConfig& cfg) {
  Objective obj(cfg, nullptr, guess, ObjectiveMode::kPreprocess);
  const Eigen::VectorXd x0 = obj.Pack(guess.waypoints, guess.durations, guess.s_final);
  Eigen::VectorXd g;
  obj.Evaluate(x0, &g);  // surfaces NonFinite with its diagnostics
  const LbfgsResult r = LbfgsMinimize(Wrap(&obj), x0, cfg.preprocess);
  return FromVector(guess, obj, r.x);
}

SolveResult AlmSolve(const InitialGuess& guess, const ProblemConfig& cfg,
                     const EsdfMap* esdf, double e_max, const IterationSink& sink) {
  SolveResult out;
  // Local copy: penalty weights may be escalated below.
  ProblemConfig local = cfg;
  Objective obj(local, esdf, guess, ObjectiveMode::kFull);
  Eigen::VectorXd x = obj.Pack(guess.waypoints, guess.durations, guess.s_final);
  Eigen::VectorXd g;
  try {
    obj.Evaluate(x, &g);
  } catch (const Error& e) {
    out.status = SolveStatus::kFailed;
    out.message = e.what();
    out.x = x;
    return out;
  }

  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  double rho = cfg.alm.rho0;
  const ObjectiveFn fn = Wrap(&obj);
  for (int outer = 0; outer < cfg.alm.max_outer + cfg.alm.max_escalations; ++outer) {
    obj.SetMultipliers(lambda, rho);
    IterationFn on_iter;
    if (sink) {
      on_iter = [&](int it, double f, const Eigen::VectorXd& grad) {
        sink({outer, it, f, grad.lpNorm<Eigen::Infinity>(), obj.last_residual().norm()});
      };
    }
    const LbfgsResult r = LbfgsMinimize(fn, x, cfg.inner, on_iter);
    out.inner_iterations += r.iterations;
    out.evaluations += r.evaluations;
    out.last_inner = r.status;
    out.outer_iterations = outer + 1;
    if (r.status == LbfgsStatus::kNonFinite) break;
    x = r.x;
    obj.Evaluate(x, nullptr);
    const Eigen::Vector2d c = obj.last_residual();
    if (c.norm() < e_max) {
      // Endpoint met. The L1 penalties are exact only for large enough
      // weights, so raise them and keep going while samples still violate.
      if (out.escalations >= cfg.alm.max_escalations) break;
      const double worst =
          SampledViolations(obj.trajectory(), obj.cache(), esdf, local.limits).Worst();
      if (worst <= cfg.max_violation) break;
      ConstraintWeights& w = local.weights;
      for (double* v : {&w.velocity, &w.accel, &w.yaw_accel, &w.safety}) {
        *v *= cfg.alm.escalation;
      }
      ++out.escalations;
      continue;
    }
    lambda += rho * c;
    rho = std::min((1.0 + cfg.alm.growth) * rho, cfg.alm.rho_max);
  }

  try {
    obj.Evaluate(x, nullptr);
  } catch (const Error& e) {
    out.status = SolveStatus::kFailed;
    out.message = e.what();
    out.x = x;
    return out;
  }
  out.x = x;
  out.trajectory = obj.trajectory();
  out.residual = obj.last_residual();
  out.final_error = out.residual.norm();
  out.violations = SampledViolations(obj.trajectory(), obj.cache(), esdf, cfg.limits);
  out.junction_residual = JunctionResidual(obj.trajectory());
  out.min_clearance = esdf != nullptr
                          ? MinClearance(obj.trajectory(), obj.cache(), *esdf)
                          : std::numeric_limits<double>::infinity();

  const bool feasible = out.violations.Worst() <= cfg.max_violation &&
                        out.junction_residual <= cfg.max_junction_residual &&
                        out.min_clearance >= cfg.robot_radius;
  if (out.final_error >= e_max) {
    out.status = SolveStatus::kIncomplete;
    out.message = "final-position error " + std::to_string(out.final_error) +
                  " m after " + std::to_string(out.outer_iterations) + " outer iterations";
  } else if (!feasible) {
    out.status = SolveStatus::kInfeasible;
    out.message = "constraint violation " + std::to_string(out.violations.Worst()) +
                  ", clearance " + std::to_string(out.min_clearance);
  } else {
    out.status = SolveStatus::kSuccess;
  }
  return out;
}

std::vector<Eigen::Vector2d> TruncatePolyline(const std::vector<Eigen::Vector2d>& points,
                                              double max_length) {
  std::vector<Eigen::Vector2d> out;
  if (points.empty()) return out;
  out.push_back(points.front());
  double acc = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double len = (points[k] - points[k - 1]).norm();
    if (acc + len >= max_length) {
      const double r = len > 0.0 ? (max_length - acc) / len : 0.0;
      out.push_back(points[k - 1] + r * (points[k] - points[k - 1]));
      return out;
    }
    acc += len;
    out.push_back(points[k]);
  }
  return out;
}

namespace {

double MsSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

PlanResult Plan(const EsdfMap& esdf, const PlanRequest& req, const ProblemConfig& cfg,
                const IterationSink& sink) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  PlanResult out;

  // Global search. Gaps narrower than twice the safety distance cannot hold a
  // feasible trajectory, so search with that margin first and fall back to
  // the robot radius only when nothing else connects.
  auto t0 = Clock::now();
  const Eigen::Vector2d search_start =
      req.path_prefix.empty() ? Eigen::Vector2d(req.start.head<2>()) : req.path_prefix.back();
  const double res = esdf.grid().resolution();
  const double d_s = cfg.limits.safety_distance;
  std::vector<double> radii = {d_s + res, d_s, cfg.robot_radius};
  std::sort(radii.begin(), radii.end(), std::greater<>());
  std::vector<Eigen::Vector2d> centers;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (k > 0 && radii[k] == radii[k - 1]) continue;
    const OccupancyGrid inflated = InflateGrid(esdf, radii[k]);
    const auto sc = NearestFreeCell(inflated, inflated.WorldToCell(search_start));
    const auto gc = NearestFreeCell(inflated, inflated.WorldToCell(req.goal));
    const bool last = k + 1 == radii.size();
    if (!sc || !gc) {
      if (last) throw Error(ErrorCode::kNoPath, "no free cell near the start or goal");
      continue;
    }
    std::vector<Eigen::Vector2i> cells;
    try {
      cells = JpsSearchCells(inflated, *sc, *gc);
    } catch (const Error&) {
      if (last) throw;
      continue;
    }
    for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
      centers.push_back(inflated.CellCenter(cells[i]));
    }
    break;
  }
  std::vector<Eigen::Vector2d> pts;
  if (req.path_prefix.empty()) {
    pts.push_back(req.start.head<2>());
  } else {
    pts = req.path_prefix;
  }
  pts.insert(pts.end(), centers.begin(), centers.end());
  pts.push_back(req.goal);
  out.timings.jps_ms = MsSince(t0);

  if (req.max_length > 0.0 && PolylineLength(pts) > req.max_length) {
    pts = TruncatePolyline(pts, req.max_length);
    out.truncated = true;
  }
  out.path.points = pts;
  out.path.length = PolylineLength(pts);

  SeedOptions seed_opt = req.seed;
  seed_opt.segment_length = cfg.segment_length;
  seed_opt.initial_duration = cfg.initial_duration;
  if (out.truncated) seed_opt.goal_heading.reset();
  out.seed = SeedTrajectory(out.path, req.start, seed_opt);

  t0 = Clock::now();
  InitialGuess guess = cfg.preprocess_enabled ? Preprocess(out.seed, cfg) : out.seed;
  out.timings.preprocess_ms = MsSince(t0);

  t0 = Clock::now();
  double e_max = req.e_max > 0.0 ? req.e_max : cfg.alm.e_max;
  if (out.truncated && req.truncated_e_max > 0.0) e_max = req.truncated_e_max;
  out.solve = AlmSolve(guess, cfg, &esdf, e_max, sink);
  out.timings.optimization_ms = MsSince(t0);
  out.timings.total_ms = MsSince(t_start);
  return out;
}

}  // namespace ddopt
