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

#include "ddopt/minco.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"
#include "oracles.hpp"

namespace ddopt {
namespace {

struct Problem {
  BoundaryConditions bc;
  Eigen::Matrix2Xd waypoints;
  double s_final = 0.0;
  Eigen::VectorXd durations;
};

// Derivative `order` of segment i at local time t, from the coefficients.
Eigen::Vector2d Deriv(const Eigen::MatrixX2d& c, int i, double t, int order) {
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int k = order; k < 6; ++k) {
    double f = 1.0;
    for (int q = 0; q < order; ++q) f *= k - q;
    out += f * std::pow(t, k - order) * c.row(6 * i + k).transpose();
  }
  return out;
}

Problem RandomProblem(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(-1, 1);
  Problem p;
  p.bc.initial << u(rng), 0.0, u(rng), u(rng), u(rng), u(rng);
  p.bc.final_state << u(rng), 0.0, u(rng), u(rng), u(rng), u(rng);
  p.waypoints.resize(2, m - 1);
  double s = 0.0;
  for (int i = 0; i < m - 1; ++i) {
    s += 1.0 + 0.5 * u(rng);
    p.waypoints(0, i) = 2 * u(rng);
    p.waypoints(1, i) = s;
  }
  p.s_final = s + 1.0;
  p.durations.resize(m);
  for (int i = 0; i < m; ++i) p.durations(i) = 0.4 + 1.2 * std::abs(u(rng));
  return p;
}

TEST(BandedMatrixTest, SolveMatchesDense) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  BandedMatrix b;
  b.Resize(20, 3, 2);
  b.SetZero();
  for (int i = 0; i < 20; ++i) {
    for (int j = std::max(0, i - 3); j <= std::min(19, i + 2); ++j) b(i, j) = u(rng);
    b(i, i) += 8.0;
  }
  const Eigen::MatrixXd dense = b.ToDense();
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Random(20, 2);
  Eigen::MatrixX2d x = rhs, y = rhs;
  ASSERT_TRUE(b.Factorize(1e-12));
  b.Solve(x);
  b.SolveTransposed(y);
  EXPECT_LT((dense * x - rhs).norm(), 1e-12);
  EXPECT_LT((dense.transpose() * y - rhs).norm(), 1e-12);
}

TEST(MincoTest, BandedMatchesIndependentDenseSolve) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 12;
    const Problem p = RandomProblem(rng, m);
    Minco minco;
    minco.Setup(p.bc, m);
    minco.Generate(p.waypoints, p.s_final, p.durations);
    const Eigen::MatrixX2d ref =
        testing::DenseMincoSolve(p.bc, p.waypoints, p.s_final, p.durations);
    EXPECT_LT((minco.coeffs() - ref).norm() / std::max(1.0, ref.norm()), 1e-10)
        << "m=" << m;
    EXPECT_FALSE(minco.used_dense_fallback());
  }
}

TEST(MincoTest, InterpolatesAndIsContinuous) {
  std::mt19937_64 rng(3);
  const int m = 6;
  const Problem p = RandomProblem(rng, m);
  Minco minco;
  minco.Setup(p.bc, m);
  minco.Generate(p.waypoints, p.s_final, p.durations);
  const Eigen::MatrixX2d& c = minco.coeffs();
  for (int ch = 0; ch < 2; ++ch) {
    for (int o = 0; o < 3; ++o) {
      EXPECT_NEAR(Deriv(c, 0, 0.0, o)(ch), p.bc.initial(o, ch), 1e-10);
      const double fin = (o == 0 && ch == 1) ? p.s_final : p.bc.final_state(o, ch);
      EXPECT_NEAR(Deriv(c, m - 1, p.durations(m - 1), o)(ch), fin, 1e-9);
    }
  }
  for (int i = 0; i + 1 < m; ++i) {
    const Eigen::Vector2d end = Deriv(c, i, p.durations(i), 0);
    EXPECT_NEAR((end - p.waypoints.col(i)).norm(), 0.0, 1e-9);
    for (int o = 0; o <= 4; ++o) {
      const Eigen::Vector2d a = Deriv(c, i, p.durations(i), o);
      const Eigen::Vector2d b = Deriv(c, i + 1, 0.0, o);
      EXPECT_LT((a - b).norm(), 1e-8 * std::max(1.0, a.norm())) << "order " << o;
    }
  }
}

TEST(MincoTest, ZeroDataGivesZeroCoefficients) {
  Minco minco;
  minco.Setup(BoundaryConditions{}, 4);
  minco.Generate(Eigen::Matrix2Xd::Zero(2, 3), 0.0, Eigen::VectorXd::Ones(4));
  EXPECT_EQ(minco.coeffs().norm(), 0.0);
  EXPECT_EQ(minco.Energy(), 0.0);
}

TEST(MincoTest, RejectsBadDurations) {
  Minco minco;
  minco.Setup(BoundaryConditions{}, 2);
  Eigen::VectorXd t(2);
  t << 1.0, 0.0;
  EXPECT_THROW(minco.Generate(Eigen::Matrix2Xd::Zero(2, 1), 1.0, t), Error);
  EXPECT_THROW(minco.Generate(Eigen::Matrix2Xd::Zero(2, 2), 1.0, Eigen::VectorXd::Ones(2)),
               Error);
}

TEST(MincoTest, ChannelsAreDecoupled) {
  std::mt19937_64 rng(4);
  Problem p = RandomProblem(rng, 4);
  Minco a;
  a.Setup(p.bc, 4);
  a.Generate(p.waypoints, p.s_final, p.durations);
  p.waypoints.row(1) *= 2.0;
  p.s_final += 3.0;
  Minco b;
  b.Setup(p.bc, 4);
  b.Generate(p.waypoints, p.s_final, p.durations);
  EXPECT_LT((a.coeffs().col(0) - b.coeffs().col(0)).norm(), 1e-12);
}

TEST(MincoTest, EnergyMatchesQuadrature) {
  std::mt19937_64 rng(5);
  const Problem p = RandomProblem(rng, 3);
  Minco minco;
  minco.Setup(p.bc, 3);
  minco.Generate(p.waypoints, p.s_final, p.durations);
  const MsTrajectory traj(minco.coeffs(), p.durations, Pose::Zero(), IcrParams{});
  const Eigen::Vector2d w(0.7, 1.3);
  double quad = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int n = 2000;
    const double h = p.durations(i) / n;
    for (int k = 0; k <= n; ++k) {
      const double c = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const Eigen::Vector2d j = traj.EvalSegment(i, k * h, 3).row(3).transpose();
      quad += c * h / 3.0 * (w(0) * j(0) * j(0) + w(1) * j(1) * j(1));
    }
  }
  EXPECT_NEAR(minco.Energy(w), quad, 1e-8 * quad);
}

// Gradient of energy plus a random linear functional of the coefficients,
// against finite differences over (waypoints, durations, s_final).
TEST(MincoTest, BackpropMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 5;
    const Problem p = RandomProblem(rng, m);
    const Eigen::MatrixX2d lin = Eigen::MatrixX2d::Random(6 * m, 2);
    const Eigen::Vector2d w(1.0, 2.0);
    auto cost = [&](const Minco& mc) {
      return mc.Energy(w) + (lin.array() * mc.coeffs().array()).sum();
    };
    Minco minco;
    minco.Setup(p.bc, m);
    minco.Generate(p.waypoints, p.s_final, p.durations);
    Eigen::MatrixX2d dc = lin;
    Eigen::VectorXd dt_direct = Eigen::VectorXd::Zero(m);
    minco.AddEnergyGradient(w, &dc, &dt_direct);
    Eigen::Matrix2Xd dwp;
    Eigen::VectorXd dT;
    double dsf = 0.0;
    minco.Backprop(dc, dt_direct, &dwp, &dT, &dsf);

    const int nw = 2 * (m - 1);
    Eigen::VectorXd x(nw + m + 1), g(nw + m + 1);
    x.head(nw) = p.waypoints.reshaped();
    g.head(nw) = dwp.reshaped();
    x.segment(nw, m) = p.durations;
    g.segment(nw, m) = dT;
    x(nw + m) = p.s_final;
    g(nw + m) = dsf;
    auto f = [&](const Eigen::VectorXd& v) {
      Minco mc;
      mc.Setup(p.bc, m);
      mc.Generate(v.head(nw).reshaped(2, m - 1), v(nw + m), v.segment(nw, m));
      return cost(mc);
    };
    const Eigen::VectorXd num = testing::NumericGradient(f, x, 1e-5);
    EXPECT_LT(testing::RelativeError(g, num, 1.0), 1e-7) << "m=" << m;
  }
}

}  // namespace
}  // namespace ddopt
