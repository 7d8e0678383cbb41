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

#include "ddopt/replanner.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

OccupancyGrid Corridor() {
  OccupancyGrid g(0.1, 300, 100);
  g.FillCells(0, 0, 299, 0);
  g.FillCells(0, 99, 299, 99);
  g.FillCells(0, 0, 0, 99);
  g.FillCells(299, 0, 299, 99);
  return g;
}

class ReplannerTest : public ::testing::Test {
 protected:
  ReplannerTest() : map_(BuildEsdf(Corridor())) {}

  TimedTrajectory PlanFrom(const Pose& start, const Eigen::Vector2d& goal) {
    ReplanInput in;
    in.robot_pose = start;
    in.map = &map_;
    in.goal = goal;
    const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
    EXPECT_EQ(out.action, ReplanAction::kSwitch) << out.reason;
    return *out.trajectory;
  }

  ProblemConfig cfg_;
  ReplanPolicy policy_;
  EsdfMap map_;
};

TEST_F(ReplannerTest, FirstPlanStartsNow) {
  ReplanInput in;
  in.now = 1.25;
  in.robot_pose = Pose(1.0, 5.0, 0.2);
  in.map = &map_;
  in.goal = Eigen::Vector2d(6.0, 5.5);
  const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
  ASSERT_EQ(out.action, ReplanAction::kSwitch) << out.reason;
  EXPECT_TRUE(out.attempted);
  EXPECT_FALSE(out.truncated);
  EXPECT_DOUBLE_EQ(out.switch_time, 1.25);
  const TimedTrajectory& tt = *out.trajectory;
  EXPECT_DOUBLE_EQ(tt.start_time, 1.25);
  EXPECT_TRUE(tt.reaches_goal);
  EXPECT_LT((tt.traj.start_pose() - in.robot_pose).norm(), 1e-12);
}

TEST_F(ReplannerTest, SafeTrajectoryIsKept) {
  const TimedTrajectory tt = PlanFrom(Pose(1.0, 5.0, 0.0), Eigen::Vector2d(7.0, 5.0));
  ReplanInput in;
  in.now = 0.4;
  in.current = &tt;
  in.map = &map_;
  in.goal = Eigen::Vector2d(7.0, 5.0);
  const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
  EXPECT_EQ(out.action, ReplanAction::kKeep);
  EXPECT_FALSE(out.attempted);
}

TEST_F(ReplannerTest, StaleMapIsSkipped) {
  ReplanInput in;
  in.map = &map_;
  in.map_age = policy_.max_map_age + 1;
  EXPECT_EQ(ReplanTick(in, policy_, cfg_).action, ReplanAction::kSkip);
  in.map = nullptr;
  in.map_age = 0;
  EXPECT_THROW(ReplanTick(in, policy_, cfg_), Error);
}

TEST_F(ReplannerTest, CollisionSwitchIsContinuous) {
  const Eigen::Vector2d goal(12.0, 5.0);
  const TimedTrajectory tt = PlanFrom(Pose(1.0, 5.0, 0.0), goal);
  OccupancyGrid grid = Corridor();
  grid.FillBox(Eigen::Vector2d(7.0, 4.4), Eigen::Vector2d(7.6, 5.6));
  const EsdfMap blocked = BuildEsdf(grid);
  ASSERT_TRUE(FirstCollision(tt, blocked, cfg_.robot_radius, 0.0, tt.end_time(), 0.05));

  ReplanInput in;
  in.now = 0.6;
  in.current = &tt;
  in.map = &blocked;
  in.goal = goal;
  const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
  ASSERT_EQ(out.action, ReplanAction::kSwitch) << out.reason;
  EXPECT_DOUBLE_EQ(out.switch_time, in.now + policy_.compute_time);
  const TimedTrajectory& next = *out.trajectory;
  EXPECT_DOUBLE_EQ(next.start_time, out.switch_time);

  const IntegrationCache cache = IntegratePositions(tt.traj);
  const double lr = tt.Local(out.switch_time);
  const Pose old_pose = PoseAt(tt.traj, cache, lr);
  EXPECT_LT((next.traj.start_pose() - old_pose).norm(), 1e-6);
  // Arc length restarts at zero; heading and all rates carry over.
  const MotionState a = EvalState(tt.traj, lr, 2);
  const MotionState b = EvalState(next.traj, 0.0, 2);
  EXPECT_NEAR(a(0, 0), b(0, 0), 1e-6);
  EXPECT_EQ(b(0, 1), 0.0);
  EXPECT_LT((a.middleRows<2>(1) - b.middleRows<2>(1)).cwiseAbs().maxCoeff(), 1e-6)
      << a << "\n" << b;
  EXPECT_FALSE(FirstCollision(next, blocked, cfg_.robot_radius, next.start_time,
                              next.end_time(), 0.01));
}

TEST_F(ReplannerTest, CollisionAtStartStops) {
  const TimedTrajectory tt = PlanFrom(Pose(1.0, 5.0, 0.0), Eigen::Vector2d(9.0, 5.0));
  OccupancyGrid grid = Corridor();
  grid.FillBox(Eigen::Vector2d(0.8, 4.8), Eigen::Vector2d(1.2, 5.2));
  const EsdfMap blocked = BuildEsdf(grid);
  ReplanInput in;
  in.current = &tt;
  in.map = &blocked;
  in.goal = Eigen::Vector2d(9.0, 5.0);
  const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
  EXPECT_EQ(out.action, ReplanAction::kEmergencyStop);
  EXPECT_FALSE(out.attempted);
}

TEST_F(ReplannerTest, LongRouteIsTruncatedAndExtended) {
  const Pose start(1.0, 5.0, 0.0);
  ReplanInput in;
  in.robot_pose = start;
  in.map = &map_;
  in.goal = Eigen::Vector2d(25.0, 5.0);
  const ReplanOutcome out = ReplanTick(in, policy_, cfg_);
  ASSERT_EQ(out.action, ReplanAction::kSwitch) << out.reason;
  EXPECT_TRUE(out.truncated);
  const TimedTrajectory& tt = *out.trajectory;
  EXPECT_FALSE(tt.reaches_goal);
  const IntegrationCache cache = IntegratePositions(tt.traj);
  const Eigen::Vector2d end = PositionAt(tt.traj, cache, tt.traj.total_duration());
  EXPECT_LE((end - start.head<2>()).norm(), policy_.max_length + policy_.relaxed_e_max);

  // Plenty of time left: keep. Close to the end: extend.
  in.current = &tt;
  in.now = 0.0;
  EXPECT_EQ(ReplanTick(in, policy_, cfg_).action, ReplanAction::kKeep);
  in.now = tt.end_time() - 0.5 * policy_.extend_margin;
  const ReplanOutcome ext = ReplanTick(in, policy_, cfg_);
  EXPECT_TRUE(ext.attempted);
  EXPECT_EQ(ext.action, ReplanAction::kSwitch) << ext.reason;
}

TEST(ReplanPolicyTest, Validation) {
  ReplanPolicy p;
  EXPECT_NO_THROW(p.Validate(0.01));
  EXPECT_DOUBLE_EQ(p.period(), 0.08);
  p.rate = 0.0;
  EXPECT_THROW(p.Validate(0.01), Error);
  p = ReplanPolicy{};
  p.relaxed_e_max = 0.001;
  EXPECT_THROW(p.Validate(0.01), Error);
}

TEST(ReplanActionTest, Names) {
  EXPECT_EQ(ToString(ReplanAction::kKeep), "keep");
  EXPECT_EQ(ToString(ReplanAction::kSwitch), "switch");
  EXPECT_EQ(ToString(ReplanAction::kEmergencyStop), "emergency_stop");
  EXPECT_EQ(ToString(ReplanAction::kSkip), "skip");
}

}  // namespace
}  // namespace ddopt
