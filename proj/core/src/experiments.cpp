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

#include "ddopt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "ddopt/error.hpp"
#include "ddopt/global_path.hpp"
#include "ddopt/metrics.hpp"

namespace ddopt {

std::optional<StartGoal> SampleStartGoal(const EsdfMap& esdf, const ProblemConfig& cfg,
                                         double min_len, double max_len,
                                         std::mt19937_64& rng, int max_attempts,
                                         int* rejected) {
  const OccupancyGrid& grid = esdf.grid();
  std::vector<Eigen::Vector2i> cells;
  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      if (esdf.Distance(ix, iy) > cfg.limits.safety_distance) cells.emplace_back(ix, iy);
    }
  }
  if (cells.size() < 2) return std::nullopt;
  const OccupancyGrid inflated =
      InflateGrid(esdf, std::max(cfg.robot_radius, cfg.limits.safety_distance));
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  for (int a = 0; a < max_attempts; ++a) {
    const Eigen::Vector2i s = cells[pick(rng)];
    const Eigen::Vector2i g = cells[pick(rng)];
    try {
      if (s == g || inflated.Blocked(s.x(), s.y()) || inflated.Blocked(g.x(), g.y())) {
        throw Error(ErrorCode::kInvalidEndpoint, "endpoint blocked");
      }
      const auto path = JpsSearchCells(inflated, s, g);
      std::vector<Eigen::Vector2d> pts;
      for (const auto& c : path) pts.push_back(grid.CellCenter(c));
      const double len = PolylineLength(pts);
      if (len < min_len || (max_len > 0.0 && len > max_len)) {
        throw Error(ErrorCode::kNoPath, "path length out of range");
      }
      StartGoal sg;
      const Eigen::Vector2d d = pts[1] - pts[0];
      sg.start = Pose(pts[0].x(), pts[0].y(), std::atan2(d.y(), d.x()));
      sg.goal = pts.back();
      sg.path_length = len;
      return sg;
    } catch (const Error&) {
      if (rejected != nullptr) ++*rejected;
    }
  }
  return std::nullopt;
}

namespace {

double Median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }),
          v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return Quantile(std::move(v), 0.5);
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

IntegralReport RunIntegralErrorExperiment(const IntegralExperimentConfig& exp,
                                          const ProblemConfig& base, std::uint64_t seed) {
  IntegralReport rep;
  rep.runs = Table({"world", "run", "path_length", "duration", "error", "error_2n", "ratio"});
  rep.summary = Table({"world", "runs", "resampled", "below_threshold", "median", "q1", "q3",
                       "lower_whisker", "upper_whisker", "max", "outliers", "median_ratio"});
  ProblemConfig cfg = base;
  cfg.intervals = exp.intervals;
  std::mt19937_64 rng(seed);

  for (std::size_t w = 0; w < exp.worlds.size(); ++w) {
    const WorldKind kind = exp.worlds[w];
    const World world = GenerateWorld(kind, seed + 1000 * (w + 1));
    const EsdfMap esdf = BuildEsdf(world.grid);
    std::vector<double> errors, ratios;
    int resampled = 0;
    const int max_tries = 20 * exp.runs;
    for (int tries = 0; static_cast<int>(errors.size()) < exp.runs && tries < max_tries;
         ++tries) {
      const auto sg = SampleStartGoal(esdf, cfg, exp.min_length, exp.max_length, rng);
      if (!sg) break;
      PlanRequest req;
      req.start = sg->start;
      req.goal = sg->goal;
      PlanResult plan;
      try {
        plan = Plan(esdf, req, cfg);
      } catch (const Error&) {
        ++resampled;
        continue;
      }
      if (plan.solve.status != SolveStatus::kSuccess) {
        ++resampled;
        continue;
      }
      const MsTrajectory& traj = plan.solve.trajectory;
      const Eigen::Vector2d oracle = FinalPosition(traj, exp.refine * exp.intervals);
      const double e1 =
          (IntegratePositions(traj, exp.intervals).final_position() - oracle).norm();
      const double e2 =
          (IntegratePositions(traj, 2 * exp.intervals).final_position() - oracle).norm();
      // Ratios are meaningless once both errors sit at round-off level.
      const double ratio =
          e1 > 1e-12 && e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::quiet_NaN();
      errors.push_back(e1);
      ratios.push_back(ratio);
      rep.runs.AddRow({std::string(ToString(kind)), static_cast<std::int64_t>(errors.size() - 1),
                       plan.path.length, traj.total_duration(), e1, e2, ratio});
    }
    rep.resampled += resampled;
    const BoxSummary b = Summarize(errors);
    const double below =
        errors.empty() ? 0.0
                       : static_cast<double>(std::count_if(errors.begin(), errors.end(),
                                                           [&](double e) {
                                                             return e < exp.threshold;
                                                           })) /
                             static_cast<double>(errors.size());
    rep.summary.AddRow({std::string(ToString(kind)), static_cast<std::int64_t>(errors.size()),
                        static_cast<std::int64_t>(resampled), below, b.median, b.q1, b.q3,
                        b.lower_whisker, b.upper_whisker, b.max,
                        static_cast<std::int64_t>(b.outliers), Median(ratios)});
  }
  return rep;
}

std::string LengthBucket(double length, const std::vector<double>& edges) {
  double lo = 0.0;
  auto fmt = [](double x) { return FormatCell(Cell{x}); };
  for (double e : edges) {
    if (length < e) return fmt(lo) + "-" + fmt(e);
    lo = e;
  }
  return fmt(lo) + "+";
}

BenchmarkReport RunPlanningBenchmark(const BenchmarkConfig& bench, const ProblemConfig& cfg,
                                     std::uint64_t seed) {
  BenchmarkReport rep;
  rep.runs = Table({"obstacles", "run", "bucket", "path_length", "status", "ct_s", "tl", "td",
                    "mv", "mla", "mlj", "mya", "myj", "final_error", "max_violation",
                    "junction_residual", "min_clearance", "outer", "inner"});
  rep.summary = Table({"obstacles", "bucket", "runs", "sr", "ct_s", "tl", "td", "mv", "mla",
                       "mlj", "mya", "myj"});
  std::mt19937_64 rng(seed);

  struct Worldlet {
    int obstacles;
    OccupancyGrid grid;
  };
  std::vector<Worldlet> worlds;
  if (bench.obstacle_counts.empty()) {
    const World w = GenerateWorld(bench.world, seed);
    worlds.push_back({w.obstacle_count, w.grid});
  } else {
    for (std::size_t k = 0; k < bench.obstacle_counts.size(); ++k) {
      worlds.push_back({bench.obstacle_counts[k],
                        GenerateRandomObstacles(bench.obstacle_counts[k], bench.obstacle_size,
                                                seed + 17 * (k + 1), Eigen::Vector2d(1.5, 1.5),
                                                1.0)});
    }
  }

  for (const Worldlet& w : worlds) {
    const EsdfMap esdf = BuildEsdf(w.grid);
    // bucket -> accumulated metrics of successes, run count, success count
    struct Acc {
      int runs = 0;
      int ok = 0;
      RunMetrics sum;
    };
    std::map<std::string, Acc> acc;
    for (int run = 0; run < bench.runs; ++run) {
      const auto sg = SampleStartGoal(esdf, cfg, bench.min_length, bench.max_length, rng);
      if (!sg) break;
      PlanRequest req;
      req.start = sg->start;
      req.goal = sg->goal;
      const auto t0 = std::chrono::steady_clock::now();
      PlanResult plan;
      std::string status;
      try {
        plan = Plan(esdf, req, cfg);
        status = std::string(ToString(plan.solve.status));
      } catch (const Error& e) {
        status = "no_path";
      }
      RunMetrics m;
      m.computation_time = Seconds(t0);
      m.success = status == "success";
      m.final_error = plan.solve.final_error;
      if (plan.solve.trajectory.segments() > 0) FillTrajectoryMetrics(plan.solve.trajectory, &m);
      const std::string bucket = LengthBucket(sg->path_length, bench.bucket_edges);
      rep.runs.AddRow({static_cast<std::int64_t>(w.obstacles), static_cast<std::int64_t>(run),
                       bucket, sg->path_length, status, m.computation_time, m.length,
                       m.duration, m.mean_velocity, m.mean_linear_accel, m.mean_linear_jerk,
                       m.mean_yaw_accel, m.mean_yaw_jerk, m.final_error,
                       plan.solve.violations.Worst(), plan.solve.junction_residual,
                       plan.solve.min_clearance,
                       static_cast<std::int64_t>(plan.solve.outer_iterations),
                       static_cast<std::int64_t>(plan.solve.inner_iterations)});
      Acc& a = acc[bucket];
      ++a.runs;
      if (m.success) {
        ++a.ok;
        a.sum.computation_time += m.computation_time;
        a.sum.length += m.length;
        a.sum.duration += m.duration;
        a.sum.mean_velocity += m.mean_velocity;
        a.sum.mean_linear_accel += m.mean_linear_accel;
        a.sum.mean_linear_jerk += m.mean_linear_jerk;
        a.sum.mean_yaw_accel += m.mean_yaw_accel;
        a.sum.mean_yaw_jerk += m.mean_yaw_jerk;
      }
    }
    for (const auto& [bucket, a] : acc) {
      const double k = a.ok > 0 ? 1.0 / a.ok : std::numeric_limits<double>::quiet_NaN();
      rep.summary.AddRow({static_cast<std::int64_t>(w.obstacles), bucket,
                          static_cast<std::int64_t>(a.runs),
                          static_cast<double>(a.ok) / a.runs, a.sum.computation_time * k,
                          a.sum.length * k, a.sum.duration * k, a.sum.mean_velocity * k,
                          a.sum.mean_linear_accel * k, a.sum.mean_linear_jerk * k,
                          a.sum.mean_yaw_accel * k, a.sum.mean_yaw_jerk * k});
    }
  }
  return rep;
}

SlipReport RunSlipComparison(const SlipComparisonConfig& exp, const ProblemConfig& base,
                             const SimulationConfig& sim, std::uint64_t seed) {
  SlipReport rep;
  rep.runs = Table({"run", "path_length", "aware_status", "naive_status", "aware_error",
                    "naive_error"});
  const World world = GenerateWorld(WorldKind::kSparse, seed);
  const EsdfMap esdf = BuildEsdf(world.grid);
  ProblemConfig aware = base;
  aware.icr = exp.slip_icr;
  ProblemConfig naive = aware;
  naive.icr.x_iv = 0.0;
  SimulationConfig track = sim;
  track.plant_icr = exp.slip_icr;
  std::mt19937_64 rng(seed);

  double sum_aware = 0.0, sum_naive = 0.0;
  for (int run = 0; run < exp.runs; ++run) {
    const auto sg = SampleStartGoal(esdf, aware, exp.min_length, exp.max_length, rng);
    if (!sg) break;
    ++rep.attempts;
    PlanRequest req;
    req.start = sg->start;
    req.goal = sg->goal;
    auto solve = [&](const ProblemConfig& c) {
      try {
        return Plan(esdf, req, c).solve;
      } catch (const Error&) {
        return SolveResult{};
      }
    };
    const SolveResult a = solve(aware);
    const SolveResult n = solve(naive);
    const bool a_ok = a.status == SolveStatus::kSuccess;
    const bool n_ok = n.status == SolveStatus::kSuccess;
    if (a_ok) ++rep.aware_successes;
    double ea = std::numeric_limits<double>::quiet_NaN();
    double en = ea;
    if (a_ok && n_ok && rep.compared < exp.tracked_runs) {
      ea = TrackTrajectory(a.trajectory, track, exp.slip_icr, seed + run).mean_error;
      en = TrackTrajectory(n.trajectory, track, exp.slip_icr, seed + run).mean_error;
      ++rep.compared;
      if (ea < en) ++rep.aware_better;
      sum_aware += ea;
      sum_naive += en;
    }
    rep.runs.AddRow({static_cast<std::int64_t>(run), sg->path_length,
                     std::string(ToString(a.status)), std::string(ToString(n.status)), ea, en});
  }
  if (rep.compared > 0) {
    rep.aware_mean_error = sum_aware / rep.compared;
    rep.naive_mean_error = sum_naive / rep.compared;
  }
  return rep;
}

}  // namespace ddopt
