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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"
#include "oracles.hpp"

namespace ddopt {
namespace {

TEST(TimeMapTest, RoundTripAndDerivative) {
  EXPECT_NEAR(TimeBackward(2.0), std::sqrt(3.0) - 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(TimeForward(0.0), 1.0);
  for (double tau = -8.0; tau <= 8.0; tau += 0.37) {
    double d = 0.0;
    const double t = TimeForward(tau, &d);
    EXPECT_GT(t, 0.0);
    EXPECT_NEAR(TimeBackward(t), tau, 1e-12 * std::max(1.0, std::abs(tau)));
    const double h = 1e-6;
    EXPECT_NEAR(d, (TimeForward(tau + h) - TimeForward(tau - h)) / (2 * h),
                1e-7 * std::max(1.0, d));
  }
  EXPECT_THROW(TimeBackward(0.0), Error);
}

EsdfMap OpenMap(int cells = 100) {
  return BuildEsdf(OccupancyGrid(0.1, cells, cells));
}

InitialGuess StraightGuess(double length) {
  GridPath path;
  path.points = {{2.0, 5.0}, {2.0 + length, 5.0}};
  path.length = length;
  return SeedTrajectory(path, Pose(2.0, 5.0, 0.0), SeedOptions{});
}

TEST(ObjectiveTest, GradientMatchesFiniteDifferences) {
  OccupancyGrid grid(0.1, 100, 100);
  grid.FillCells(40, 52, 46, 58);  // close to the straight path
  const EsdfMap esdf = BuildEsdf(grid);
  ProblemConfig cfg;
  cfg.weights = ConstraintWeights{10, 10, 10, 10, 10, 10};
  cfg.limits.v_max = 1.0;  // make kinematic penalties active
  const InitialGuess guess = StraightGuess(5.0);
  for (ObjectiveMode mode : {ObjectiveMode::kFull, ObjectiveMode::kPreprocess}) {
    Objective obj(cfg, &esdf, guess, mode);
    obj.SetMultipliers(Eigen::Vector2d(0.3, -0.2), 5.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 0.05);
    Eigen::VectorXd x = obj.Pack(guess.waypoints, guess.durations, guess.s_final);
    for (int k = 0; k < x.size(); ++k) x(k) += nd(rng);
    Eigen::VectorXd g;
    obj.Evaluate(x, &g);
    auto f = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd unused;
      return obj.Evaluate(v, &unused);
    };
    const Eigen::VectorXd num = testing::NumericGradient(f, x, 1e-6);
    EXPECT_LT(testing::RelativeError(g, num, 1.0), 1e-5)
        << "mode " << static_cast<int>(mode);
  }
}

TEST(ObjectiveTest, PackUnpackRoundTrip) {
  ProblemConfig cfg;
  const InitialGuess guess = StraightGuess(4.0);
  Objective obj(cfg, nullptr, guess, ObjectiveMode::kPreprocess);
  const Eigen::VectorXd x = obj.Pack(guess.waypoints, guess.durations, guess.s_final);
  EXPECT_EQ(x.size(), obj.dimension());
  Eigen::Matrix2Xd wp;
  Eigen::VectorXd t;
  double sf = 0.0;
  obj.Unpack(x, &wp, &t, &sf);
  EXPECT_LT((wp - guess.waypoints).norm(), 1e-12);
  EXPECT_LT((t - guess.durations).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(sf, guess.s_final);
}

TEST(AlmSolveTest, StraightLineReachesGoal) {
  const EsdfMap esdf = OpenMap();
  ProblemConfig cfg;
  const InitialGuess guess = StraightGuess(5.0);
  const SolveResult r = AlmSolve(Preprocess(guess, cfg), cfg, &esdf, 0.01);
  EXPECT_EQ(r.status, SolveStatus::kSuccess) << r.message;
  EXPECT_LT(r.final_error, 0.01);
  EXPECT_LE(r.violations.Worst(), 1e-3);
  EXPECT_LE(r.junction_residual, 1e-9);
  const Eigen::Vector2d end = IntegratePositions(r.trajectory).final_position();
  EXPECT_LT((end - Eigen::Vector2d(7.0, 5.0)).norm(), 0.01);
}

TEST(AlmSolveTest, TighterToleranceIsHonoured) {
  const EsdfMap esdf = OpenMap();
  ProblemConfig cfg;
  const InitialGuess guess = Preprocess(StraightGuess(3.0), cfg);
  for (double e : {0.1, 0.01, 0.001}) {
    const SolveResult r = AlmSolve(guess, cfg, &esdf, e);
    EXPECT_EQ(r.status, SolveStatus::kSuccess) << "e_max " << e << ": " << r.message;
    EXPECT_LT(r.final_error, e);
  }
}

TEST(PlanTest, GoalInsideObstacleNeverSucceeds) {
  OccupancyGrid grid(0.1, 100, 100);
  grid.FillCells(60, 40, 70, 60);
  const EsdfMap esdf = BuildEsdf(grid);
  ProblemConfig cfg;
  cfg.alm.max_outer = 4;
  PlanRequest req;
  req.start = Pose(2.0, 5.0, 0.0);
  req.goal = Eigen::Vector2d(6.5, 5.0);
  const PlanResult r = Plan(esdf, req, cfg);
  EXPECT_NE(r.solve.status, SolveStatus::kSuccess);
}

TEST(PlanTest, AroundObstacle) {
  OccupancyGrid grid(0.1, 100, 100);
  grid.FillCells(45, 30, 55, 70);
  const EsdfMap esdf = BuildEsdf(grid);
  ProblemConfig cfg;
  PlanRequest req;
  req.start = Pose(2.0, 5.0, 0.0);
  req.goal = Eigen::Vector2d(8.0, 5.0);
  const PlanResult r = Plan(esdf, req, cfg);
  EXPECT_EQ(r.solve.status, SolveStatus::kSuccess) << r.solve.message;
  EXPECT_GE(r.solve.min_clearance, cfg.robot_radius);
  EXPECT_GT(r.timings.total_ms, 0.0);
}

TEST(PreprocessTest, KeepsShapeAndLowersEnergy) {
  ProblemConfig cfg;
  const InitialGuess guess = StraightGuess(6.0);
  const InitialGuess pre = Preprocess(guess, cfg);
  EXPECT_EQ(pre.segments(), guess.segments());
  EXPECT_EQ(pre.anchors.size(), guess.anchors.size());
  EXPECT_TRUE((pre.durations.array() > 0.0).all());
  auto energy = [&](const InitialGuess& g) {
    Objective obj(cfg, nullptr, g, ObjectiveMode::kPreprocess);
    Eigen::VectorXd grad;
    return obj.Evaluate(obj.Pack(g.waypoints, g.durations, g.s_final), &grad);
  };
  EXPECT_LE(energy(pre), energy(guess));
}

TEST(TruncateTest, CutsAtLength) {
  const std::vector<Eigen::Vector2d> pts = {{0, 0}, {3, 0}, {3, 4}};
  const auto cut = TruncatePolyline(pts, 5.0);
  ASSERT_EQ(cut.size(), 3u);
  EXPECT_LT((cut.back() - Eigen::Vector2d(3, 2)).norm(), 1e-12);
  EXPECT_NEAR(PolylineLength(cut), 5.0, 1e-12);
}

}  // namespace
}  // namespace ddopt
