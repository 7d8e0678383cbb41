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

#include "ddopt/simulation.hpp"

#include <gtest/gtest.h>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

bool AnyReason(const Table& events, const std::string& needle) {
  const int col = events.ColumnIndex("reason");
  for (const auto& row : events.rows()) {
    if (std::get<std::string>(row[static_cast<std::size_t>(col)]).find(needle) !=
        std::string::npos) {
      return true;
    }
  }
  return false;
}

TEST(ScenarioTest, KindsAndDeterminism) {
  for (ScenarioKind k : {ScenarioKind::kUShaped, ScenarioKind::kPopUp}) {
    EXPECT_EQ(ParseScenarioKind(ToString(k)), k);
    const Scenario a = MakeScenario(k, 4);
    const Scenario b = MakeScenario(k, 4);
    EXPECT_EQ(a.truth, b.truth);
    EXPECT_EQ(a.start, b.start);
    EXPECT_EQ(a.goal, b.goal);
    const EsdfMap esdf = BuildEsdf(a.truth);
    EXPECT_GT(esdf.Query(a.start.head<2>()).value, 0.5);
    EXPECT_GT(esdf.Query(a.goal).value, 0.5);
  }
  EXPECT_THROW(ParseScenarioKind("maze"), Error);
  EXPECT_EQ(MakePopUpScenario(1).popups.size(), 1u);
}

TEST(ScenarioTest, PopUpBlocksTheStraightLine) {
  const Scenario s = MakePopUpScenario(3);
  const PopUpObstacle& p = s.popups.front();
  EXPECT_GT(p.trigger_distance, 0.0);
  EXPECT_LT(p.trigger_distance, SimulationConfig{}.sensing_range);
  EXPECT_LT(p.lo.y(), s.start.y());
  EXPECT_GT(p.hi.y(), s.start.y());
  EXPECT_GT(p.lo.x(), s.start.x());
  EXPECT_LT(p.hi.x(), s.goal.x());
}

TEST(ClosedLoopTest, UShapedReachesGoal) {
  ProblemConfig cfg;
  SimulationConfig sim;
  const SimulationResult r = RunClosedLoop(MakeUShapedScenario(0), cfg, sim, 0);
  EXPECT_TRUE(r.reached_goal) << r.message;
  EXPECT_FALSE(r.collided);
  EXPECT_GT(r.plans, 1);
  EXPECT_EQ(r.timings.size(), static_cast<std::size_t>(r.plans));
  EXPECT_EQ(r.states.columns().size(), 11u);
  EXPECT_LT(r.max_tracking_error, 0.05);
  EXPECT_TRUE(AnyReason(r.events, "extending truncated plan"));
}

TEST(ClosedLoopTest, PopUpIsAvoided) {
  ProblemConfig cfg;
  SimulationConfig sim;
  const SimulationResult r = RunClosedLoop(MakePopUpScenario(2), cfg, sim, 2);
  EXPECT_TRUE(r.reached_goal) << r.message;
  EXPECT_FALSE(r.collided);
  EXPECT_TRUE(AnyReason(r.events, "collision ahead"));
}

TEST(ClosedLoopTest, DeterministicUnderSeed) {
  ProblemConfig cfg;
  SimulationConfig sim;
  sim.actuation_noise = 0.02;
  const Scenario s = MakePopUpScenario(5);
  const SimulationResult a = RunClosedLoop(s, cfg, sim, 9);
  const SimulationResult b = RunClosedLoop(s, cfg, sim, 9);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.final_time, b.final_time);
}

TEST(ClosedLoopTest, ValidatesConfig) {
  ProblemConfig cfg;
  SimulationConfig sim;
  sim.control_dt = 0.0;
  EXPECT_THROW(sim.Validate(cfg), Error);
  sim = SimulationConfig{};
  sim.plant_icr = IcrParams{-0.3, 0.3, 0.0};
  EXPECT_THROW(sim.Validate(cfg), Error);
}

TEST(TrackTrajectoryTest, MatchedModelTracksClosely) {
  ProblemConfig cfg;
  cfg.icr = IcrParams{0.3, -0.3, 0.2};
  const World w = GenerateWorld(WorldKind::kSparse, 3);
  const EsdfMap esdf = BuildEsdf(w.grid);
  // Any feasible pair will do.
  PlanResult plan;
  for (int attempt = 0; attempt < 10; ++attempt) {
    PlanRequest req;
    req.start = Pose(2.0, 2.0, 0.0);
    req.goal = Eigen::Vector2d(6.0 + attempt, 6.0);
    try {
      plan = Plan(esdf, req, cfg);
    } catch (const Error&) {
      continue;
    }
    if (plan.solve.status == SolveStatus::kSuccess) break;
  }
  ASSERT_EQ(plan.solve.status, SolveStatus::kSuccess);
  SimulationConfig sim;
  sim.plant_icr = cfg.icr;
  const TrackingResult r = TrackTrajectory(plan.solve.trajectory, sim, cfg.icr, 1);
  EXPECT_LT(r.max_error, 0.02);
  EXPECT_GT(r.steps, 10);
}

}  // namespace
}  // namespace ddopt
