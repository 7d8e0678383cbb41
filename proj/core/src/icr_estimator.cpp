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

#include "ddopt/icr_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ddopt/error.hpp"

namespace ddopt {

Vector6d PropagateState(const Vector6d& s, double vl, double vr, double dt,
                        Matrix6d* jac) {
  const IcrParams icr{s(3), s(4), s(5)};
  const Twist tw = TwistFromWheels(vl, vr, icr);
  StepJacobian sj;
  Vector6d out = s;
  out.head<3>() = Step(s.head<3>(), tw, dt, jac != nullptr ? &sj : nullptr);
  if (jac == nullptr) return out;

  // d(vx, vy, omega) / d(y_il, y_ir, x_iv).
  const double sep = icr.separation();
  const double w = tw.omega;
  const double dw_dl = -w / sep;
  const double dw_dr = w / sep;
  const double sum = icr.y_il + icr.y_ir;
  Eigen::Matrix3d dtw;
  dtw << -0.5 * dw_dl * sum - 0.5 * w, -0.5 * dw_dr * sum - 0.5 * w, 0.0,
      -icr.x_iv * dw_dl, -icr.x_iv * dw_dr, -w,
      dw_dl, dw_dr, 0.0;
  jac->setIdentity();
  jac->topLeftCorner<3, 3>() = sj.d_pose;
  jac->topRightCorner<3, 3>() = sj.d_twist * dtw;
  return out;
}

IcrEstimator::IcrEstimator(const Pose& pose, const IcrParams& icr, const Matrix6d& cov0,
                           const EkfNoise& noise)
    : noise_(noise) {
  if (!icr.Valid()) throw Error(ErrorCode::kInvalidArgument, "invalid ICR prior");
  state_.mean << pose, icr.y_il, icr.y_ir, icr.x_iv;
  state_.cov = cov0;
  Symmetrize();
}

void IcrEstimator::Predict(double vl, double vr, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "predict needs dt > 0");
  Matrix6d f;
  state_.mean = PropagateState(state_.mean, vl, vr, dt, &f);
  state_.cov = f * state_.cov * f.transpose();
  state_.cov.diagonal() += noise_.process * dt;
  Symmetrize();
}

bool IcrEstimator::Update(const Pose& obs) {
  if (!obs.allFinite()) throw Error(ErrorCode::kNonFinite, "observation is not finite");
  Eigen::Vector3d innov = obs - state_.mean.head<3>();
  innov.z() = WrapAngle(innov.z());
  const Eigen::Matrix3d s =
      state_.cov.topLeftCorner<3, 3>() + Eigen::Matrix3d(noise_.observation.asDiagonal());
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(s);
  last_d2_ = innov.dot(ldlt.solve(innov));
  if (!(last_d2_ <= kGate)) {
    ++rejected_;
    return false;
  }
  // K = P H^T S^-1 with H = [I 0].
  const Eigen::Matrix<double, 6, 3> k =
      ldlt.solve(state_.cov.leftCols<3>().transpose()).transpose();
  state_.mean += k * innov;
  Matrix6d ikh = Matrix6d::Identity();
  ikh.leftCols<3>() -= k;
  state_.cov = ikh * state_.cov * ikh.transpose() +
               k * noise_.observation.asDiagonal() * k.transpose();

  // Keep the tracks apart so the yaw-rate denominator stays well defined.
  const double sep = state_.mean(3) - state_.mean(4);
  if (sep < kMinSeparation) {
    const double mid = 0.5 * (state_.mean(3) + state_.mean(4));
    state_.mean(3) = mid + 0.5 * kMinSeparation;
    state_.mean(4) = mid - 0.5 * kMinSeparation;
  }
  Symmetrize();
  return true;
}

void IcrEstimator::Symmetrize() {
  const Matrix6d t = state_.cov.transpose();
  state_.cov = 0.5 * (state_.cov + t);
}

EstimatorRun SimulateEstimator(const EstimatorSimConfig& cfg, std::uint64_t seed) {
  if (!(cfg.rate > 0.0) || !(cfg.duration > 0.0) || !(cfg.period > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rate, duration and period must be > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double dt = 1.0 / cfg.rate;
  const int steps = static_cast<int>(std::lround(cfg.duration * cfg.rate));

  Vector6d truth;
  truth << 0.0, 0.0, 0.0, cfg.truth.y_il, cfg.truth.y_ir, cfg.truth.x_iv;
  IcrEstimator ekf(Pose::Zero(), cfg.initial, cfg.prior.asDiagonal().toDenseMatrix(),
                   cfg.noise);

  EstimatorRun run;
  run.log = Table({"t", "x", "y", "theta", "y_il", "y_ir", "x_iv", "var_x", "var_y",
                   "var_theta", "var_y_il", "var_y_ir", "var_x_iv", "rejected"});
  run.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= steps; ++k) {
    const double t = k * dt;
    const double omega = cfg.yaw_rate * std::sin(2.0 * std::numbers::pi * t / cfg.period);
    const WheelSpeeds w = WheelsFromTwist(cfg.speed, omega, cfg.truth);
    truth = PropagateState(truth, w.left, w.right, dt, nullptr);
    ekf.Predict(w.left, w.right, dt);
    Pose obs = truth.head<3>();
    for (int i = 0; i < 3; ++i) obs(i) += cfg.observation_sigma(i) * gauss(rng);
    const bool accepted = ekf.Update(obs);

    const EkfState& st = ekf.state();
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(st.cov, Eigen::EigenvaluesOnly);
    run.min_eigenvalue = std::min(run.min_eigenvalue, eig.eigenvalues().minCoeff());
    std::vector<Cell> row{t};
    for (int i = 0; i < 6; ++i) row.emplace_back(st.mean(i));
    for (int i = 0; i < 6; ++i) row.emplace_back(st.cov(i, i));
    row.emplace_back(static_cast<std::int64_t>(accepted ? 0 : 1));
    run.log.AddRow(std::move(row));
  }
  run.final_state = ekf.state();
  run.rejected = ekf.rejected();
  return run;
}

}  // namespace ddopt
