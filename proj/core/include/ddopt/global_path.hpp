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

#ifndef DDOPT_GLOBAL_PATH_HPP_
#define DDOPT_GLOBAL_PATH_HPP_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ddopt/dd_kinematics.hpp"
#include "ddopt/grid_world.hpp"
#include "ddopt/minco.hpp"

namespace ddopt {

// Polyline in world coordinates.
struct GridPath {
  std::vector<Eigen::Vector2d> points;
  double length = 0.0;
};

double PolylineLength(const std::vector<Eigen::Vector2d>& points);

// Octile distance between cells (diagonal steps cost sqrt 2).
double OctileDistance(const Eigen::Vector2i& a, const Eigen::Vector2i& b);

// Jump point search on the 8-connected grid. Diagonal moves require both
// adjacent orthogonal cells to be free, so paths never cut corners. Returns
// the jump points from start to goal; throws InvalidEndpoint when either end
// is blocked and NoPath when the goal is unreachable.
std::vector<Eigen::Vector2i> JpsSearchCells(const OccupancyGrid& grid,
                                            const Eigen::Vector2i& start,
                                            const Eigen::Vector2i& goal);

// World-coordinate wrapper: the polyline runs through cell centers of the
// jump points, with its end points replaced by the exact start and goal.
GridPath JpsSearch(const OccupancyGrid& grid, const Eigen::Vector2d& start,
                   const Eigen::Vector2d& goal);

// Nearest free cell by breadth-first search within max_steps rings.
std::optional<Eigen::Vector2i> NearestFreeCell(const OccupancyGrid& grid,
                                               const Eigen::Vector2i& cell,
                                               int max_steps = 50);

// Optimizer starting point derived from a global path.
struct InitialGuess {
  Pose start_pose = Pose::Zero();
  BoundaryConditions bc;
  Eigen::Matrix2Xd waypoints;  // (theta, s) at interior junctions
  Eigen::VectorXd durations;
  double s_final = 0.0;
  std::vector<Eigen::Vector2d> anchors;  // per-segment end positions
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();

  int segments() const { return static_cast<int>(durations.size()); }
};

struct SeedOptions {
  double segment_length = 1.0;
  double initial_duration = 0.8;
  // Initial rates (theta', theta'', s', s'') of the start state.
  double start_yaw_rate = 0.0;
  double start_yaw_accel = 0.0;
  double start_speed = 0.0;
  double start_accel = 0.0;
  // Final heading; the final path tangent when unset.
  std::optional<double> goal_heading;
};

// Equal-arc-length sampling of the path into max(3, ceil(L / L_seg))
// segments with tangent headings unwrapped from the start heading.
InitialGuess SeedTrajectory(const GridPath& path, const Pose& start_pose,
                            const SeedOptions& options = {});

// Point at arc length a along the polyline and the index of its segment.
Eigen::Vector2d PolylinePoint(const std::vector<Eigen::Vector2d>& points, double a,
                              int* segment = nullptr);

}  // namespace ddopt

#endif  // DDOPT_GLOBAL_PATH_HPP_
