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

#ifndef DDOPT_EXPERIMENTS_HPP_
#define DDOPT_EXPERIMENTS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ddopt/grid_world.hpp"
#include "ddopt/optimizer.hpp"
#include "ddopt/report_io.hpp"
#include "ddopt/simulation.hpp"

namespace ddopt {

struct StartGoal {
  Pose start = Pose::Zero();
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double path_length = 0.0;
};

// Start and goal drawn uniformly over cells with ESDF > safety distance,
// rejecting pairs without a JPS path (on the grid inflated by the larger of
// robot radius and safety distance) or with a path length outside [min_len, max_len] (max_len <= 0:
// unbounded). The start heading faces the first path leg. Rejections are
// added to *rejected when non-null.
std::optional<StartGoal> SampleStartGoal(const EsdfMap& esdf, const ProblemConfig& cfg,
                                         double min_len, double max_len,
                                         std::mt19937_64& rng, int max_attempts = 2000,
                                         int* rejected = nullptr);

struct IntegralExperimentConfig {
  std::vector<WorldKind> worlds = {WorldKind::kSparse, WorldKind::kDense, WorldKind::kSpiral};
  int runs = 300;  // solved trajectories per world
  int intervals = kDefaultIntervals;
  int refine = 100;  // oracle uses refine * intervals per segment
  double min_length = 1.0;
  double max_length = 50.0;
  double threshold = 1e-5;
};

struct IntegralReport {
  // world, run, path_length, duration, error, error_2n, ratio
  Table runs;
  // world, runs, resampled, below_threshold, median, q1, q3, lower_whisker,
  // upper_whisker, max, outliers, median_ratio
  Table summary;
  int resampled = 0;
};

IntegralReport RunIntegralErrorExperiment(const IntegralExperimentConfig& exp,
                                          const ProblemConfig& cfg, std::uint64_t seed);

struct BenchmarkConfig {
  WorldKind world = WorldKind::kSparse;
  // When non-empty, one random-obstacle world per count replaces `world`.
  std::vector<int> obstacle_counts;
  double obstacle_size = 1.0;
  int runs = 200;  // per world
  double min_length = 1.0;
  double max_length = 0.0;
  std::vector<double> bucket_edges = {10.0, 20.0};
};

struct BenchmarkReport {
  // obstacles, run, bucket, path_length, status, ct_s, tl, td, mv, mla, mlj,
  // mya, myj, final_error, max_violation, junction_residual, min_clearance,
  // outer, inner
  Table runs;
  // obstacles, bucket, runs, sr, ct_s, tl, td, mv, mla, mlj, mya, myj
  Table summary;
};

BenchmarkReport RunPlanningBenchmark(const BenchmarkConfig& bench, const ProblemConfig& cfg,
                                     std::uint64_t seed);

// Bucket label such as "0-10", "10-20" or "20+".
std::string LengthBucket(double length, const std::vector<double>& edges);

struct SlipComparisonConfig {
  int runs = 100;
  double min_length = 2.0;
  double max_length = 12.0;
  IcrParams slip_icr{0.3, -0.3, 0.2};
  int tracked_runs = 100;  // how many successful pairs are tracked
};

struct SlipReport {
  // run, path_length, aware_status, naive_status, aware_error, naive_error
  Table runs;
  int attempts = 0;
  int aware_successes = 0;
  int compared = 0;
  int aware_better = 0;
  double aware_mean_error = 0.0;
  double naive_mean_error = 0.0;
};

// Plans each pair with the slip ICR and with x_iv = 0, then tracks both on a
// plant with the slip ICR using a controller that knows it.
SlipReport RunSlipComparison(const SlipComparisonConfig& exp, const ProblemConfig& cfg,
                             const SimulationConfig& sim, std::uint64_t seed);

}  // namespace ddopt

#endif  // DDOPT_EXPERIMENTS_HPP_
