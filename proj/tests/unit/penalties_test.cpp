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

#include "ddopt/penalties.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"
#include "oracles.hpp"

namespace ddopt {
namespace {

TEST(RelaxL1Test, Values) {
  const double d = kRelaxWidth;
  EXPECT_EQ(RelaxL1(-1.0).value, 0.0);
  EXPECT_EQ(RelaxL1(0.0).value, 0.0);
  EXPECT_NEAR(RelaxL1(0.5 * d).value, 3.0 * d / 32.0, 1e-18);
  EXPECT_NEAR(RelaxL1(d).value, 0.5 * d, 1e-18);
  EXPECT_NEAR(RelaxL1(2.0).value, 2.0 - 0.5 * d, 1e-15);
  EXPECT_EQ(RelaxL1(2.0).slope, 1.0);
}

TEST(RelaxL1Test, SmoothAndMonotone) {
  const double d = 0.1;
  double prev = -1.0;
  for (int k = -50; k <= 300; ++k) {
    const double x = k * d / 100.0;
    const Relaxed r = RelaxL1(x, d);
    EXPECT_GE(r.value, prev);
    EXPECT_GE(r.value, 0.0);
    EXPECT_GE(r.value, x - 0.5 * d - 1e-15);
    prev = r.value;
    const double h = 1e-7;
    const double fd = (RelaxL1(x + h, d).value - RelaxL1(x - h, d).value) / (2 * h);
    EXPECT_NEAR(r.slope, fd, 1e-6);
  }
  // Slope is continuous at both knots and its derivative vanishes there.
  for (double knot : {0.0, d}) {
    const double h = 1e-9;
    EXPECT_NEAR(RelaxL1(knot - h, d).slope, RelaxL1(knot + h, d).slope, 1e-6);
    const double h2 = 1e-5;
    const double curv_l = (RelaxL1(knot, d).slope - RelaxL1(knot - h2, d).slope) / h2;
    const double curv_r = (RelaxL1(knot + h2, d).slope - RelaxL1(knot, d).slope) / h2;
    EXPECT_NEAR(curv_l, curv_r, 1e-2);
  }
}

TEST(CouplingTest, DiamondVertices) {
  const Limits lim;  // v in [-3, 3], |omega| <= 4
  auto worst = [&](double v, double om) {
    const CouplingViolations c = VelocityCoupling(v, om, lim);
    return std::max({c.forward[0], c.forward[1], c.reverse[0], c.reverse[1]});
  };
  EXPECT_NEAR(worst(3.0, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(worst(-3.0, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(worst(0.0, 4.0), 0.0, 1e-12);
  EXPECT_NEAR(worst(0.0, -4.0), 0.0, 1e-12);
  EXPECT_NEAR(worst(1.5, 2.0), 0.0, 1e-12);
  EXPECT_LT(worst(1.0, 1.0), 0.0);
  EXPECT_GT(worst(3.1, 0.0), 0.0);
  EXPECT_GT(worst(2.0, 2.0), 0.0);
}

TEST(CouplingTest, NoReverseWhenVminZero) {
  Limits lim;
  lim.v_min = 0.0;
  const CouplingViolations c = VelocityCoupling(-0.1, 0.0, lim);
  EXPECT_NEAR(std::max(c.reverse[0], c.reverse[1]), 0.4, 1e-12);
}

TEST(AccelTest, Examples) {
  const Limits lim;
  EXPECT_NEAR(AccelPenalties(3.0, 0.0, lim).linear, 0.0, 1e-12);
  EXPECT_NEAR(AccelPenalties(-4.0, 0.0, lim).linear, 7.0, 1e-12);
  EXPECT_NEAR(AccelPenalties(0.0, 5.0, lim).yaw, 9.0, 1e-12);
}

TEST(DurationTest, Balance) {
  const Limits lim;
  Eigen::VectorXd t(3);
  t << 1.0, 1.0, 4.0;
  DurationViolations dv = DurationBalance(t, lim);
  EXPECT_NEAR(dv.lower.maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(dv.upper.maxCoeff(), 0.0, 1e-12);
  t(2) = 5.0;
  dv = DurationBalance(t, lim);
  EXPECT_NEAR(dv.lower(0), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(dv.upper(2), 1.0 / 3.0, 1e-12);
  // Jacobian against finite differences.
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd tp = t, tm = t;
    tp(i) += h;
    tm(i) -= h;
    const DurationViolations p = DurationBalance(tp, lim), m = DurationBalance(tm, lim);
    Eigen::VectorXd fd(6);
    fd << (p.lower - m.lower) / (2 * h), (p.upper - m.upper) / (2 * h);
    EXPECT_LT((fd - dv.jacobian.col(i)).norm(), 1e-8);
  }
}

TEST(SafetyTest, GradientMatchesFiniteDifferences) {
  OccupancyGrid grid(0.1, 40, 40);
  grid.FillCells(18, 18, 22, 22);
  const EsdfMap esdf = BuildEsdf(grid);
  Limits lim;
  lim.contour = RectangleContour(0.4, 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 3.0), a(-3.0, 3.0);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const Pose pose(u(rng), u(rng), a(rng));
    const auto base = SafetyPenalty(pose, esdf, lim);
    const double h = 1e-7;
    for (int d = 0; d < 3; ++d) {
      Pose pp = pose, pm = pose;
      pp(d) += h;
      pm(d) -= h;
      const auto p = SafetyPenalty(pp, esdf, lim);
      const auto m = SafetyPenalty(pm, esdf, lim);
      for (std::size_t l = 0; l < base.size(); ++l) {
        const double fd = (p[l].value - m[l].value) / (2 * h);
        // Skip samples straddling a bilinear patch edge.
        const double one_sided = (p[l].value - base[l].value) / h;
        if (std::abs(fd - one_sided) > 1e-4) continue;
        EXPECT_NEAR(base[l].gradient(d), fd, 1e-5);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 4000);
}

MsTrajectory RandomTrajectory(std::mt19937_64& rng, int m, double scale) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixX2d c(6 * m, 2);
  for (int r = 0; r < 6 * m; ++r) {
    c(r, 0) = scale * u(rng) / (1 + r % 6);
    c(r, 1) = scale * u(rng) / (1 + r % 6);
  }
  Eigen::VectorXd t(m);
  for (int i = 0; i < m; ++i) t(i) = 0.4 + std::abs(u(rng));
  return MsTrajectory(c, t, Pose(2.0, 2.0, 0.0), IcrParams{0.3, -0.3, 0.1});
}

TEST(AccumulateTest, ZeroForSlowTrajectoryInFreeSpace) {
  OccupancyGrid grid(0.1, 60, 60);
  const EsdfMap esdf = BuildEsdf(grid);
  std::mt19937_64 rng(4);
  const MsTrajectory traj = RandomTrajectory(rng, 3, 0.05);
  Eigen::VectorXd t = traj.durations();
  MsTrajectory even = traj;
  even.SetDurations(Eigen::VectorXd::Ones(3));
  const IntegrationCache cache = IntegratePositions(even, 8);
  Eigen::MatrixX2d dc = Eigen::MatrixX2d::Zero(18, 2);
  Eigen::VectorXd dT = Eigen::VectorXd::Zero(3);
  std::vector<Eigen::Vector2d> pg(cache.position_count(), Eigen::Vector2d::Zero());
  const PenaltyBreakdown pb =
      Accumulate(even, cache, &esdf, ConstraintWeights{}, Limits{}, PenaltyMask{}, &dc,
                 &dT, &pg);
  EXPECT_EQ(pb.total(), 0.0);
  EXPECT_EQ(dc.norm(), 0.0);
  EXPECT_EQ(dT.norm(), 0.0);
  EXPECT_LE(SampledViolations(even, cache, &esdf, Limits{}).Worst(), 0.0);
}

TEST(AccumulateTest, ScalesLinearlyWithWeights) {
  std::mt19937_64 rng(5);
  const MsTrajectory traj = RandomTrajectory(rng, 3, 6.0);
  const IntegrationCache cache = IntegratePositions(traj, 6);
  PenaltyMask mask;
  mask.safety = false;
  auto run = [&](double k) {
    ConstraintWeights w{k, 2 * k, 3 * k, k, 4 * k, k};
    Eigen::MatrixX2d dc = Eigen::MatrixX2d::Zero(18, 2);
    Eigen::VectorXd dT = Eigen::VectorXd::Zero(3);
    return Accumulate(traj, cache, nullptr, w, Limits{}, mask, &dc, &dT, nullptr).total();
  };
  const double a = run(1.0);
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(run(7.0), 7.0 * a, 1e-9 * a);
}

TEST(AccumulateTest, SafetyWithoutEsdfThrows) {
  std::mt19937_64 rng(6);
  const MsTrajectory traj = RandomTrajectory(rng, 1, 1.0);
  const IntegrationCache cache = IntegratePositions(traj, 4);
  Eigen::MatrixX2d dc = Eigen::MatrixX2d::Zero(6, 2);
  Eigen::VectorXd dT = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(Accumulate(traj, cache, nullptr, {}, {}, {}, &dc, &dT, nullptr), Error);
}

// Total penalty (all families active) differentiated through the position
// integral, against finite differences over coefficients and durations.
TEST(AccumulateTest, GradientMatchesFiniteDifferences) {
  OccupancyGrid grid(0.1, 60, 60);
  grid.FillCells(24, 24, 30, 30);
  const EsdfMap esdf = BuildEsdf(grid);
  ConstraintWeights w{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  Limits lim;
  lim.safety_distance = 0.6;
  lim.eps_low = 0.8;
  lim.eps_upp = 1.2;
  const int m = 3;
  const int n = 6;
  std::mt19937_64 rng(7);
  int passed = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const MsTrajectory traj = RandomTrajectory(rng, m, 4.0);
    auto total = [&](const MsTrajectory& t, Eigen::MatrixX2d* dc, Eigen::VectorXd* dT) {
      const IntegrationCache cache = IntegratePositions(t, n);
      std::vector<Eigen::Vector2d> pg(cache.position_count(), Eigen::Vector2d::Zero());
      Eigen::MatrixX2d c = Eigen::MatrixX2d::Zero(6 * m, 2);
      Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
      const double v =
          Accumulate(t, cache, &esdf, w, lim, PenaltyMask{}, &c, &d, &pg).total();
      if (dc != nullptr) {
        BackpropPositions(t, cache, pg, &c, &d);
        *dc = c;
        *dT = d;
      }
      return v;
    };
    Eigen::MatrixX2d dc;
    Eigen::VectorXd dT;
    total(traj, &dc, &dT);
    Eigen::VectorXd x(13 * m), g(13 * m);
    x.head(12 * m) = traj.coeffs().reshaped();
    g.head(12 * m) = dc.reshaped();
    x.tail(m) = traj.durations();
    g.tail(m) = dT;
    auto f = [&](const Eigen::VectorXd& v) {
      MsTrajectory t(v.head(12 * m).reshaped(6 * m, 2), v.tail(m), traj.start_pose(),
                     traj.icr());
      return total(t, nullptr, nullptr);
    };
    const Eigen::VectorXd num = testing::NumericGradient(f, x, 1e-6);
    // Bilinear ESDF patches have kinks; a trial passes at 1e-5, and nearly
    // all trials must.
    if (testing::RelativeError(g, num, 1.0) < 1e-5) ++passed;
  }
  EXPECT_GE(passed, 9);
}

TEST(AnchorTest, Value) {
  Eigen::MatrixX2d c = Eigen::MatrixX2d::Zero(6, 2);
  c(1, 1) = 1.0;
  const MsTrajectory traj(c, Eigen::VectorXd::Ones(1), Pose::Zero(), IcrParams{});
  const IntegrationCache cache = IntegratePositions(traj, 4);
  std::vector<Eigen::Vector2d> pg(cache.position_count(), Eigen::Vector2d::Zero());
  EXPECT_NEAR(AnchorPenalty(cache, {Eigen::Vector2d(1.3, 0.4)}, &pg), 0.25, 1e-12);
  EXPECT_NEAR((pg.back() - Eigen::Vector2d(-0.6, -0.8)).norm(), 0.0, 1e-12);
}

}  // namespace
}  // namespace ddopt
