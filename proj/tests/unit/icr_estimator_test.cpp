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

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

Vector6d RandomState(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Vector6d s;
  s << 3 * u(rng), 3 * u(rng), 3 * u(rng), 0.3 + 0.1 * u(rng), -0.3 + 0.1 * u(rng),
      0.3 * u(rng);
  return s;
}

Matrix6d Prior() {
  Vector6d d;
  d << 1e-4, 1e-4, 1e-4, 1e-2, 1e-2, 1e-2;
  return d.asDiagonal();
}

TEST(PropagateTest, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector6d s = RandomState(rng);
    const double vl = u(rng), vr = u(rng), dt = 0.02 + 0.1 * std::abs(u(rng));
    Matrix6d jac;
    PropagateState(s, vl, vr, dt, &jac);
    Matrix6d num;
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Vector6d a = s, b = s;
      a(k) += h;
      b(k) -= h;
      num.col(k) = (PropagateState(a, vl, vr, dt, nullptr) -
                    PropagateState(b, vl, vr, dt, nullptr)) / (2 * h);
    }
    EXPECT_LT((jac - num).norm() / std::max(1.0, num.norm()), 1e-6) << "trial " << trial;
  }
}

TEST(PropagateTest, StraightMotionHasNoSlipSensitivity) {
  std::mt19937_64 rng(4);
  const Vector6d s = RandomState(rng);
  Matrix6d jac;
  PropagateState(s, 1.2, 1.2, 0.1, &jac);
  EXPECT_NEAR(jac.col(5).head<3>().norm(), 0.0, 1e-15);
}

TEST(IcrEstimatorTest, StationaryPredictOnlyAddsNoise) {
  EkfNoise noise;
  IcrEstimator ekf(Pose(1, 2, 0.5), IcrParams{0.3, -0.3, 0.1}, Prior(), noise);
  const Vector6d before = ekf.state().mean;
  ekf.Predict(0.0, 0.0, 0.2);
  EXPECT_EQ(ekf.state().mean, before);
  const Matrix6d expected = Prior() + Matrix6d(noise.process.asDiagonal()) * 0.2;
  EXPECT_LT((ekf.state().cov - expected).norm(), 1e-15);
  EXPECT_THROW(ekf.Predict(1, 1, 0.0), Error);
}

TEST(IcrEstimatorTest, ZeroInnovationShrinksCovariance) {
  IcrEstimator ekf(Pose(0, 0, 0), IcrParams{}, Prior());
  ekf.Predict(1.0, 1.1, 0.05);
  const EkfState before = ekf.state();
  EXPECT_TRUE(ekf.Update(before.pose()));
  EXPECT_LT((ekf.state().mean - before.mean).norm(), 1e-15);
  EXPECT_LT(ekf.state().cov.trace(), before.cov.trace());
}

TEST(IcrEstimatorTest, HeadingInnovationIsWrapped) {
  IcrEstimator ekf(Pose(0, 0, 3.0), IcrParams{}, Prior());
  const EkfState before = ekf.state();
  Pose obs = before.pose();
  obs(2) += 2 * std::numbers::pi;
  EXPECT_TRUE(ekf.Update(obs));
  EXPECT_LT((ekf.state().mean - before.mean).norm(), 1e-12);
  EXPECT_NEAR(ekf.last_mahalanobis(), 0.0, 1e-12);
}

TEST(IcrEstimatorTest, OutlierIsGated) {
  IcrEstimator ekf(Pose(0, 0, 0), IcrParams{}, Prior());
  const EkfState before = ekf.state();
  EXPECT_FALSE(ekf.Update(Pose(1.0, 0.0, 0.0)));
  EXPECT_EQ(ekf.rejected(), 1);
  EXPECT_GT(ekf.last_mahalanobis(), IcrEstimator::kGate);
  EXPECT_EQ(ekf.state().mean, before.mean);
  EXPECT_EQ(ekf.state().cov, before.cov);
}

TEST(IcrEstimatorTest, SeparationIsClamped) {
  Matrix6d cov = Prior();
  cov(3, 3) = cov(4, 4) = 1.0;
  IcrEstimator ekf(Pose::Zero(), IcrParams{0.015, 0.0, 0.0}, cov);
  ekf.Update(Pose::Zero());
  EXPECT_GE(ekf.state().icr().separation(), IcrEstimator::kMinSeparation - 1e-15);
}

TEST(IcrEstimatorTest, CovarianceStaysPositiveDefinite) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::normal_distribution<double> n(0.0, 0.01);
  IcrEstimator ekf(Pose::Zero(), IcrParams{}, Prior());
  Vector6d truth;
  truth << 0, 0, 0, 0.3, -0.3, 0.2;
  for (int k = 0; k < 100000; ++k) {
    const double vl = u(rng), vr = u(rng);
    truth = PropagateState(truth, vl, vr, 0.02, nullptr);
    ekf.Predict(vl, vr, 0.02);
    ekf.Update(truth.head<3>() + Eigen::Vector3d(n(rng), n(rng), n(rng)));
    if (k % 1000 == 0) {
      const Matrix6d& p = ekf.state().cov;
      ASSERT_EQ(p, p.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix6d> eig(p);
      ASSERT_GT(eig.eigenvalues().minCoeff(), 0.0) << "step " << k;
    }
  }
}

TEST(IcrEstimatorTest, NoiseFreeErrorDecreases) {
  EstimatorSimConfig cfg;
  cfg.observation_sigma.setZero();
  cfg.duration = 30.0;
  const EstimatorRun run = SimulateEstimator(cfg, 1);
  const Table& log = run.log;
  auto err = [&](std::size_t row) {
    return std::abs(log.Number(row, "y_il") - 0.3) + std::abs(log.Number(row, "y_ir") + 0.3) +
           std::abs(log.Number(row, "x_iv") - 0.2);
  };
  const std::size_t per_5s = 250;
  double prev = err(0);
  for (std::size_t r = per_5s; r < log.size(); r += per_5s) {
    EXPECT_LT(err(r), prev) << "row " << r;
    prev = err(r);
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(IcrEstimatorTest, FigureEightConverges) {
  const EstimatorRun run = SimulateEstimator(EstimatorSimConfig{}, 7);
  const IcrParams est = run.final_state.icr();
  EXPECT_NEAR(est.y_il, 0.3, 0.02);
  EXPECT_NEAR(est.y_ir, -0.3, 0.02);
  EXPECT_NEAR(est.x_iv, 0.2, 0.02);
  EXPECT_GT(run.min_eigenvalue, 0.0);
  EXPECT_EQ(run.log.size(), 3000u);
  EXPECT_EQ(run.log.columns().size(), 14u);
}

TEST(IcrEstimatorTest, StraightDrivingLeavesSlipUnobserved) {
  EstimatorSimConfig cfg;
  cfg.yaw_rate = 0.0;
  cfg.duration = 20.0;
  const EstimatorRun run = SimulateEstimator(cfg, 2);
  EXPECT_GE(run.final_state.cov(5, 5), cfg.prior(5));
}

}  // namespace
}  // namespace ddopt
