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

// ddopt command-line tool. Every command takes a JSON scenario config
// (docs/config.md); flags override the matching config fields.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddopt/error.hpp"
#include "ddopt/experiments.hpp"
#include "ddopt/grid_world.hpp"
#include "ddopt/icr_estimator.hpp"
#include "ddopt/metrics.hpp"
#include "ddopt/optimizer.hpp"
#include "ddopt/report_io.hpp"
#include "ddopt/scenario_config.hpp"
#include "ddopt/simulation.hpp"
#include "ddopt/trajectory_io.hpp"

namespace {

using namespace ddopt;

constexpr int kExitSolveFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string world;
  std::string map;
};

void AddCommon(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--config", f->config, "JSON scenario config");
  cmd->add_option("--seed", f->seed, "Seed for worlds and sampling (overrides config)");
  cmd->add_option("--out", f->out, "Output directory (overrides config)");
  cmd->add_option("--world", f->world, "Generated world: sparse, dense or spiral");
  cmd->add_option("--map", f->map, "Plain-text map file (plan only)");
}

ScenarioConfig Resolve(const CommonFlags& f) {
  ScenarioConfig cfg = f.config.empty() ? ScenarioConfig{} : LoadScenarioConfig(f.config);
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.world.seed = *f.seed;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.world.empty()) {
    cfg.world.kind = ParseWorldKind(f.world);
    cfg.bench.world = cfg.world.kind;
  }
  if (!f.map.empty()) cfg.world.map_file = f.map;
  cfg.Validate();
  EnsureDirectory(cfg.output_dir);
  return cfg;
}

std::string OutPath(const ScenarioConfig& cfg, const std::string& name) {
  return cfg.output_dir + "/" + name;
}

std::vector<double> ParseList(const std::string& text, std::size_t n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (v.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " needs " + std::to_string(n) + " comma-separated values");
  }
  return v;
}

int RunPlan(const CommonFlags& flags, const std::string& start_s, const std::string& goal_s,
            const std::string& dump) {
  ScenarioConfig cfg = Resolve(flags);
  OccupancyGrid grid = cfg.world.map_file.empty()
                           ? GenerateWorld(cfg.world.kind, cfg.world.seed).grid
                           : LoadMap(cfg.world.map_file);
  const EsdfMap esdf = BuildEsdf(grid);
  if (!start_s.empty()) {
    const auto v = ParseList(start_s, 3, "--start");
    cfg.plan.start = Pose(v[0], v[1], v[2]);
  }
  if (!goal_s.empty()) {
    const auto v = ParseList(goal_s, 2, "--goal");
    cfg.plan.goal = Eigen::Vector2d(v[0], v[1]);
  }
  PlanRequest req;
  if (!cfg.plan.start || !cfg.plan.goal) {
    std::mt19937_64 rng(cfg.seed);
    const auto sg = SampleStartGoal(esdf, cfg.problem, 1.0, 0.0, rng);
    if (!sg) throw Error(ErrorCode::kNoPath, "could not sample a start/goal pair");
    req.start = cfg.plan.start.value_or(sg->start);
    req.goal = cfg.plan.goal.value_or(sg->goal);
  } else {
    req.start = *cfg.plan.start;
    req.goal = *cfg.plan.goal;
  }

  Table iterations({"outer", "inner", "cost", "grad_norm", "residual"});
  IterationSink sink;
  if (!dump.empty()) {
    sink = [&](const IterationRecord& r) {
      iterations.AddRow({static_cast<std::int64_t>(r.outer),
                         static_cast<std::int64_t>(r.inner), r.cost, r.grad_norm, r.residual});
    };
  }
  const PlanResult plan = Plan(esdf, req, cfg.problem, sink);
  const SolveResult& sol = plan.solve;
  if (!dump.empty()) SaveCsv(iterations, dump);

  RunMetrics m;
  m.computation_time = plan.timings.total_ms / 1000.0;
  m.success = sol.status == SolveStatus::kSuccess;
  m.final_error = sol.final_error;
  FillTrajectoryMetrics(sol.trajectory, &m, cfg.problem.intervals);
  Table metrics({"status", "ct_s", "tl", "td", "mv", "mla", "mlj", "mya", "myj",
                 "final_error", "max_violation", "junction_residual", "min_clearance",
                 "outer", "inner", "path_length", "truncated"});
  metrics.AddRow({std::string(ToString(sol.status)), m.computation_time, m.length, m.duration,
                  m.mean_velocity, m.mean_linear_accel, m.mean_linear_jerk, m.mean_yaw_accel,
                  m.mean_yaw_jerk, m.final_error, sol.violations.Worst(), sol.junction_residual,
                  sol.min_clearance, static_cast<std::int64_t>(sol.outer_iterations),
                  static_cast<std::int64_t>(sol.inner_iterations), plan.path.length,
                  static_cast<std::int64_t>(plan.truncated)});
  SaveTrajectory(sol.trajectory, OutPath(cfg, "trajectory.json"));
  SaveCsv(metrics, OutPath(cfg, "metrics.csv"));

  // Plot-ready samples of the pose and rates.
  Table samples({"t", "x", "y", "theta", "v", "omega"});
  const IntegrationCache cache = IntegratePositions(sol.trajectory, cfg.problem.intervals);
  const double total = sol.trajectory.total_duration();
  const int n = std::max(1, static_cast<int>(std::ceil(total / 0.05)));
  for (int k = 0; k <= n; ++k) {
    const double t = total * k / n;
    const Pose p = PoseAt(sol.trajectory, cache, t);
    const MotionState st = EvalState(sol.trajectory, t, 1);
    samples.AddRow({t, p.x(), p.y(), p.z(), st(1, 1), st(1, 0)});
  }
  SaveCsv(samples, OutPath(cfg, "samples.csv"));

  std::printf("plan %s: start (%.3f, %.3f, %.3f) goal (%.3f, %.3f), %d segments, "
              "duration %.3f s, error %.2e m, %.2f ms\n",
              std::string(ToString(sol.status)).c_str(), req.start.x(), req.start.y(),
              req.start.z(), req.goal.x(), req.goal.y(), sol.trajectory.segments(), total,
              sol.final_error, plan.timings.total_ms);
  if (!m.success) std::printf("  %s\n", sol.message.c_str());
  return m.success ? 0 : kExitSolveFailed;
}

int RunBench(const CommonFlags& flags, std::optional<int> runs) {
  ScenarioConfig cfg = Resolve(flags);
  if (runs) cfg.bench.runs = *runs;
  const BenchmarkReport rep = RunPlanningBenchmark(cfg.bench, cfg.problem, cfg.seed);
  SaveCsv(rep.runs, OutPath(cfg, "bench_runs.csv"));
  SaveCsv(rep.summary, OutPath(cfg, "bench_summary.csv"));
  SaveJson(rep.summary, OutPath(cfg, "bench_summary.json"));
  WriteCsv(rep.summary, std::cout);
  return 0;
}

int RunIntegral(const CommonFlags& flags, std::optional<int> runs) {
  ScenarioConfig cfg = Resolve(flags);
  if (runs) cfg.integral.runs = *runs;
  if (!flags.world.empty()) cfg.integral.worlds = {cfg.world.kind};
  const IntegralReport rep = RunIntegralErrorExperiment(cfg.integral, cfg.problem, cfg.seed);
  SaveCsv(rep.runs, OutPath(cfg, "integral_runs.csv"));
  SaveCsv(rep.summary, OutPath(cfg, "integral_summary.csv"));
  WriteCsv(rep.summary, std::cout);
  return 0;
}

int RunSim(const CommonFlags& flags, const std::string& scenario, std::optional<int> runs) {
  ScenarioConfig cfg = Resolve(flags);
  if (!scenario.empty()) cfg.simulation.scenario = ParseScenarioKind(scenario);
  if (runs) cfg.simulation.runs = *runs;
  const std::string name(ToString(cfg.simulation.scenario));
  Table summary({"scenario", "seed", "reached_goal", "collided", "collision_time",
                 "final_time", "plans", "switches", "emergency_stops", "mean_tracking_error",
                 "max_tracking_error"});
  Table timing({"scenario", "seed", "jps", "preprocess", "optimization", "total"});
  int collisions = 0;
  for (int r = 0; r < cfg.simulation.runs; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Scenario sc = MakeScenario(cfg.simulation.scenario, seed);
    const SimulationResult res = RunClosedLoop(sc, cfg.problem, cfg.simulation.config, seed);
    collisions += res.collided ? 1 : 0;
    const std::string stem = "sim_" + name + "_" + std::to_string(seed);
    SaveCsv(res.states, OutPath(cfg, stem + "_states.csv"));
    SaveJsonLines(res.events, OutPath(cfg, stem + "_events.jsonl"));
    for (const auto& row : res.timings.rows()) {
      timing.AddRow({name, static_cast<std::int64_t>(seed), row[0], row[1], row[2], row[3]});
    }
    summary.AddRow({name, static_cast<std::int64_t>(seed),
                    static_cast<std::int64_t>(res.reached_goal),
                    static_cast<std::int64_t>(res.collided), res.collision_time,
                    res.final_time, static_cast<std::int64_t>(res.plans),
                    static_cast<std::int64_t>(res.switches),
                    static_cast<std::int64_t>(res.emergency_stops), res.mean_tracking_error,
                    res.max_tracking_error});
  }
  SaveCsv(summary, OutPath(cfg, "sim_summary.csv"));
  SaveCsv(timing, OutPath(cfg, "sim_timing.csv"));
  WriteCsv(summary, std::cout);
  return collisions == 0 ? 0 : kExitSolveFailed;
}

int RunSlip(const CommonFlags& flags, std::optional<int> runs) {
  ScenarioConfig cfg = Resolve(flags);
  if (runs) cfg.slip.runs = *runs;
  const SlipReport rep =
      RunSlipComparison(cfg.slip, cfg.problem, cfg.simulation.config, cfg.seed);
  SaveCsv(rep.runs, OutPath(cfg, "slip_runs.csv"));
  std::printf("slip: %d/%d aware solves succeeded; tracking mean error aware %.4f m, "
              "x_iv = 0 %.4f m over %d pairs (aware better in %d)\n",
              rep.aware_successes, rep.attempts, rep.aware_mean_error, rep.naive_mean_error,
              rep.compared, rep.aware_better);
  return 0;
}

int RunEkf(const CommonFlags& flags, double duration) {
  ScenarioConfig cfg = Resolve(flags);
  EstimatorSimConfig sim;
  sim.truth = cfg.slip.slip_icr;
  sim.duration = duration;
  const EstimatorRun run = SimulateEstimator(sim, cfg.seed);
  SaveCsv(run.log, OutPath(cfg, "ekf_log.csv"));
  const IcrParams e = run.final_state.icr();
  std::printf("ekf: estimate y_il %.4f y_ir %.4f x_iv %.4f (truth %.4f %.4f %.4f), "
              "%d rejected\n",
              e.y_il, e.y_ir, e.x_iv, sim.truth.y_il, sim.truth.y_ir, sim.truth.x_iv,
              run.rejected);
  return 0;
}

int RunMap(const CommonFlags& flags) {
  ScenarioConfig cfg = Resolve(flags);
  SaveMap(GenerateWorld(cfg.world.kind, cfg.world.seed).grid,
          OutPath(cfg, std::string(ToString(cfg.world.kind)) + ".map"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory optimization and benchmarks for differential-drive robots"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string start, goal, dump, scenario;
  std::optional<int> runs;
  double ekf_duration = 60.0;

  auto* plan = app.add_subcommand("plan", "Plan one trajectory");
  AddCommon(plan, &flags);
  plan->add_option("--start", start, "Start pose x,y,theta");
  plan->add_option("--goal", goal, "Goal position x,y");
  plan->add_option("--dump-iterations", dump, "CSV file for per-iteration solver records");

  auto* bench = app.add_subcommand("bench", "Success rate and smoothness benchmark");
  AddCommon(bench, &flags);
  bench->add_option("--runs", runs, "Pairs per world");

  auto* integral = app.add_subcommand("integral", "Integration error experiment");
  AddCommon(integral, &flags);
  integral->add_option("--runs", runs, "Solved trajectories per world");

  auto* sim = app.add_subcommand("sim", "Closed-loop replanning simulation");
  AddCommon(sim, &flags);
  sim->add_option("--scenario", scenario, "u_shaped or popup");
  sim->add_option("--runs", runs, "Number of seeds");

  auto* slip = app.add_subcommand("slip", "Slip-aware versus slip-free planning");
  AddCommon(slip, &flags);
  slip->add_option("--runs", runs, "Start/goal pairs");

  auto* ekf = app.add_subcommand("ekf", "ICR estimator on a figure-eight");
  AddCommon(ekf, &flags);
  ekf->add_option("--duration", ekf_duration, "Simulated seconds");

  auto* map = app.add_subcommand("map", "Write a generated world as a map file");
  AddCommon(map, &flags);

  auto* config = app.add_subcommand("config", "Print the configuration with defaults filled in");
  config->add_option("--config", flags.config, "JSON scenario config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return RunPlan(flags, start, goal, dump);
    if (*bench) return RunBench(flags, runs);
    if (*integral) return RunIntegral(flags, runs);
    if (*sim) return RunSim(flags, scenario, runs);
    if (*slip) return RunSlip(flags, runs);
    if (*ekf) return RunEkf(flags, ekf_duration);
    if (*map) return RunMap(flags);
    if (*config) {
      ScenarioConfig cfg = flags.config.empty() ? ScenarioConfig{}
                                                : LoadScenarioConfig(flags.config);
      std::cout << ScenarioConfigToJson(cfg) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "ddopt: " << e.what() << '\n';
    if (e.code() == ErrorCode::kIoError) return kExitIo;
    if (e.code() == ErrorCode::kNoPath) return kExitSolveFailed;
    return kExitUsage;
  }
  return kExitUsage;
}
