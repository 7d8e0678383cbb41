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

#include "ddopt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {

Eigen::Vector2d IntegrateSpan(const MsTrajectory& traj, double t0, double t1,
                              int per_piece) {
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  if (!(t1 > t0)) return acc;
  const int m = traj.segments();
  double seg_start = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dur = traj.durations()(i);
    const double lo = std::max(t0, seg_start);
    const double hi = std::min(t1, seg_start + dur);
    if (hi > lo) {
      const double a = lo - seg_start;
      const double h = (hi - lo) / (2 * per_piece);
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      for (int k = 0; k <= 2 * per_piece; ++k) {
        const double w = (k == 0 || k == 2 * per_piece) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * EvalIntegrand(traj, i, a + k * h).f;
      }
      acc += sum * h / 3.0;
    }
    seg_start += dur;
    if (seg_start >= t1) break;
  }
  return acc;
}

ReferenceTable::ReferenceTable(const MsTrajectory& traj, double interval)
    : traj_(traj), interval_(interval), version_(traj.version()) {
  if (!(interval > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reference interval must be positive");
  }
  const double total = traj.total_duration();
  const int count = static_cast<int>(std::floor(total / interval + 1e-12)) + 1;
  samples_.reserve(static_cast<std::size_t>(count));
  Pose p = traj.start_pose();
  samples_.push_back(p);
  for (int j = 1; j < count; ++j) {
    const double ta = (j - 1) * interval;
    const double tb = std::min(j * interval, total);
    p.head<2>() += IntegrateSpan(traj, ta, tb);
    p.z() = EvalState(traj, tb, 0)(0, 0);
    samples_.push_back(p);
  }
}

ReferencePoint ReferenceTable::At(double t) const {
  ReferencePoint out;
  if (samples_.empty()) return out;
  if (!(t >= 0.0)) throw Error(ErrorCode::kOutOfDomain, "reference time before start");
  const double total = traj_.total_duration();
  const bool past_end = t > total;
  t = std::clamp(t, 0.0, total);
  const std::size_t j = std::min(samples_.size() - 1,
                                 static_cast<std::size_t>(std::floor(t / interval_)));
  const double tj = static_cast<double>(j) * interval_;
  const MotionState st = EvalState(traj_, t, 1);
  out.pose = samples_[j];
  if (t > tj) out.pose.head<2>() += IntegrateSpan(traj_, tj, t);
  out.pose.z() = st(0, 0);
  if (!past_end) {
    out.v = st(1, 1);
    out.omega = st(1, 0);
  }
  return out;
}

std::string_view ToString(TrackerModel m) {
  return m == TrackerModel::kTwist ? "twist" : "wheel";
}

TrackerModel ParseTrackerModel(std::string_view name) {
  if (name == "twist") return TrackerModel::kTwist;
  if (name == "wheel") return TrackerModel::kWheel;
  throw Error(ErrorCode::kConfigError, "unknown tracker model '" + std::string(name) + "'");
}

int HorizonProblem::steps() const {
  return std::max(1, static_cast<int>(std::lround(horizon / dt)));
}

void HorizonProblem::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "tracker: " + what);
  };
  if (!(dt > 0.0)) fail("dt must be > 0");
  if (!(horizon >= dt)) fail("horizon must be >= dt");
  if ((w_pose.array() < 0.0).any()) fail("pose weights must be >= 0");
  if ((w_input.array() < 0.0).any()) fail("input weights must be >= 0");
  if (!(u_min.array() < u_max.array()).all()) fail("u_min must be < u_max");
  if (max_iterations < 1) fail("max_iterations must be >= 1");
  if (memory < 1) fail("memory must be >= 1");
}

Tracker::Tracker(const HorizonProblem& problem, const IcrParams& icr)
    : problem_(problem), icr_(icr) {
  problem_.Validate();
}

Eigen::Matrix<double, 3, 2> Tracker::TwistInputJacobian() const {
  Eigen::Matrix<double, 3, 2> b;
  if (problem_.model == TrackerModel::kTwist) {
    b << 1.0, 0.0, 0.0, -icr_.x_iv, 0.0, 1.0;
    return b;
  }
  const double sep = icr_.separation();
  const double sum = icr_.y_il + icr_.y_ir;
  b << 0.5 + 0.5 * sum / sep, 0.5 - 0.5 * sum / sep,
      icr_.x_iv / sep, -icr_.x_iv / sep,
      -1.0 / sep, 1.0 / sep;
  return b;
}

Twist Tracker::InputTwist(const Eigen::Vector2d& u) const {
  if (problem_.model == TrackerModel::kTwist) return SlipTwist(u.x(), u.y(), icr_);
  return TwistFromWheels(u.x(), u.y(), icr_);
}

Eigen::Vector2d Tracker::ReferenceInput(double v, double omega) const {
  if (problem_.model == TrackerModel::kTwist) return {v, omega};
  const WheelSpeeds w = WheelsFromTwist(v, omega, icr_);
  return {w.left, w.right};
}

Eigen::Vector2d Tracker::Project(const Eigen::Vector2d& u) const {
  return u.cwiseMax(problem_.u_min).cwiseMin(problem_.u_max);
}

std::vector<ReferencePoint> Tracker::References(double t0,
                                               const ReferenceTable& table) const {
  std::vector<ReferencePoint> refs(static_cast<std::size_t>(problem_.steps() + 1));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    refs[i] = table.At(t0 + static_cast<double>(i) * problem_.dt);
  }
  return refs;
}

double Tracker::Cost(const Pose& current, double t0, const ReferenceTable& table,
                     const std::vector<Eigen::Vector2d>& inputs,
                     std::vector<Eigen::Vector2d>* grad) const {
  std::vector<ReferencePoint> refs(inputs.size() + 1);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    refs[i] = table.At(t0 + static_cast<double>(i) * problem_.dt);
  }
  return RolloutCost(current, refs, inputs, grad);
}

double Tracker::RolloutCost(const Pose& current, const std::vector<ReferencePoint>& refs,
                            const std::vector<Eigen::Vector2d>& inputs,
                            std::vector<Eigen::Vector2d>* grad) const {
  const int n = static_cast<int>(inputs.size());
  const double dt = problem_.dt;
  const Eigen::Matrix<double, 3, 2> b = TwistInputJacobian();
  std::vector<StepJacobian> jac(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector3d> err(static_cast<std::size_t>(n + 1));
  std::vector<Eigen::Vector2d> du(static_cast<std::size_t>(n));

  auto pose_error = [&](const Pose& p, int i) {
    Eigen::Vector3d e = p - refs[static_cast<std::size_t>(i)].pose;
    e.z() = WrapAngle(e.z());
    return e;
  };
  const Eigen::Vector3d& wp = problem_.w_pose;
  const Eigen::Vector2d& wu = problem_.w_input;

  Pose p = current;
  err[0] = pose_error(p, 0);
  double cost = err[0].dot(wp.cwiseProduct(err[0]));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const ReferencePoint& r = refs[k];
    du[k] = inputs[k] - ReferenceInput(r.v, r.omega);
    cost += du[k].dot(wu.cwiseProduct(du[k]));
    p = Step(p, InputTwist(inputs[k]), dt, &jac[k]);
    err[k + 1] = pose_error(p, i + 1);
    cost += err[k + 1].dot(wp.cwiseProduct(err[k + 1]));
  }
  if (grad == nullptr) return cost;

  grad->assign(static_cast<std::size_t>(n), Eigen::Vector2d::Zero());
  Eigen::Vector3d lam = 2.0 * wp.cwiseProduct(err[static_cast<std::size_t>(n)]);
  for (int i = n - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    (*grad)[k] = 2.0 * wu.cwiseProduct(du[k]) + (jac[k].d_twist * b).transpose() * lam;
    lam = 2.0 * wp.cwiseProduct(err[k]) + jac[k].d_pose.transpose() * lam;
  }
  return cost;
}

namespace {

Eigen::VectorXd Flatten(const std::vector<Eigen::Vector2d>& u) {
  Eigen::VectorXd x(2 * u.size());
  for (std::size_t k = 0; k < u.size(); ++k) x.segment<2>(2 * static_cast<Eigen::Index>(k)) = u[k];
  return x;
}

std::vector<Eigen::Vector2d> Unflatten(const Eigen::VectorXd& x) {
  std::vector<Eigen::Vector2d> u(static_cast<std::size_t>(x.size() / 2));
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = x.segment<2>(2 * static_cast<Eigen::Index>(k));
  return u;
}

}  // namespace

HorizonSolution Tracker::Solve(const Pose& current, double t0, const ReferenceTable& table) {
  const int n = problem_.steps();
  HorizonSolution sol;

  const std::vector<ReferencePoint> refs = References(t0, table);
  // Warm start: previous solution shifted by one step, else the reference.
  std::vector<Eigen::Vector2d> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (static_cast<int>(warm_.size()) == n) {
      u[k] = warm_[std::min<std::size_t>(k + 1, warm_.size() - 1)];
    } else {
      const ReferencePoint& r = refs[k];
      u[k] = ReferenceInput(r.v, r.omega);
    }
    u[k] = Project(u[k]);
  }

  const Eigen::VectorXd lo = Eigen::VectorXd(problem_.u_min.replicate(n, 1));
  const Eigen::VectorXd hi = Eigen::VectorXd(problem_.u_max.replicate(n, 1));
  auto project = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.cwiseMax(lo).cwiseMin(hi)); };

  std::vector<Eigen::Vector2d> g_parts;
  Eigen::VectorXd x = Flatten(u);
  double f = RolloutCost(current, refs, u, &g_parts);
  Eigen::VectorXd g = Flatten(g_parts);
  if (!std::isfinite(f) || !g.allFinite()) {
    sol.status = TrackerStatus::kDegraded;
    sol.u0 = Project(0.5 * last_u0_);
    sol.inputs.assign(static_cast<std::size_t>(n), sol.u0);
    sol.cost = f;
    last_u0_ = sol.u0;
    warm_.clear();
    return sol;
  }
  sol.cost_history.push_back(f);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  constexpr double kArmijo = 1e-4;
  int iter = 0;
  for (; iter < problem_.max_iterations; ++iter) {
    // Variables held at an active bound.
    Eigen::VectorXd free = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if ((x(k) <= lo(k) && g(k) > 0.0) || (x(k) >= hi(k) && g(k) < 0.0)) free(k) = 0.0;
    }
    const Eigen::VectorXd pg = g.cwiseProduct(free);
    if (pg.lpNorm<Eigen::Infinity>() < 1e-8) break;

    // Two-loop recursion on the free subspace.
    Eigen::VectorXd q = pg;
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [s, y] = pairs[k];
      alpha[k] = s.cwiseProduct(free).dot(q) / s.cwiseProduct(free).dot(y.cwiseProduct(free));
      q -= alpha[k] * y.cwiseProduct(free);
    }
    double gamma = 1.0 / std::max(1.0, pg.lpNorm<Eigen::Infinity>());
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      const Eigen::VectorXd yf = y.cwiseProduct(free);
      const double yy = yf.squaredNorm();
      if (yy > 0.0) gamma = s.cwiseProduct(free).dot(yf) / yy;
    }
    Eigen::VectorXd d = gamma * q;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [s, y] = pairs[k];
      const Eigen::VectorXd sf = s.cwiseProduct(free);
      const double beta = y.cwiseProduct(free).dot(d) / sf.dot(y.cwiseProduct(free));
      d += sf * (alpha[k] - beta);
    }
    d = -d.cwiseProduct(free);
    if (!(d.dot(pg) < 0.0) || !d.allFinite()) {
      d = -pg;
      pairs.clear();
    }

    // Backtracking along the projection arc.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    double fn = 0.0;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      xn = project(x + step * d);
      fn = RolloutCost(current, refs, Unflatten(xn), nullptr);
      if (std::isfinite(fn) && fn <= f + kArmijo * g.dot(xn - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    RolloutCost(current, refs, Unflatten(xn), &g_parts);
    const Eigen::VectorXd gn = Flatten(g_parts);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    if (s.dot(y) > 1e-12 * s.squaredNorm()) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > problem_.memory) pairs.pop_front();
    }
    const double decrease = f - fn;
    x = xn;
    g = gn;
    f = fn;
    sol.cost_history.push_back(f);
    if (decrease <= 1e-10 * std::max(1.0, std::abs(f))) {
      ++iter;
      break;
    }
  }

  sol.inputs = Unflatten(x);
  sol.u0 = sol.inputs.front();
  sol.cost = f;
  sol.iterations = iter;
  warm_ = sol.inputs;
  last_u0_ = sol.u0;
  return sol;
}

}  // namespace ddopt
