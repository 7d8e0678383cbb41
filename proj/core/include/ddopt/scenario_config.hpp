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

#ifndef DDOPT_SCENARIO_CONFIG_HPP_
#define DDOPT_SCENARIO_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "ddopt/experiments.hpp"
#include "ddopt/grid_world.hpp"
#include "ddopt/optimizer.hpp"
#include "ddopt/simulation.hpp"

namespace ddopt {

struct WorldSpec {
  WorldKind kind = WorldKind::kSparse;
  std::uint64_t seed = 1;
  // Plain-text map; overrides the generated world when set.
  std::string map_file;
};

struct PlanSpec {
  // Missing start or goal are sampled at random from the world.
  std::optional<Pose> start;
  std::optional<Eigen::Vector2d> goal;
};

struct SimulationSpec {
  ScenarioKind scenario = ScenarioKind::kUShaped;
  int runs = 20;
  SimulationConfig config;
};

// Everything a CLI run needs. Schema in docs/config.md; all units SI.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  WorldSpec world;
  ProblemConfig problem;
  PlanSpec plan;
  BenchmarkConfig bench;
  IntegralExperimentConfig integral;
  SlipComparisonConfig slip;
  SimulationSpec simulation;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// Strict JSON parsing: unknown keys and type mismatches raise ConfigError
// with the dotted key path; malformed JSON raises ParseError. Missing keys
// keep their defaults.
ScenarioConfig ParseScenarioConfig(const std::string& text);
ScenarioConfig LoadScenarioConfig(const std::string& path);

// Full configuration including defaults, in the same schema.
std::string ScenarioConfigToJson(const ScenarioConfig& cfg, int indent = 2);

}  // namespace ddopt

#endif  // DDOPT_SCENARIO_CONFIG_HPP_
