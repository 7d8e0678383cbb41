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

#ifndef DDOPT_GRID_WORLD_HPP_
#define DDOPT_GRID_WORLD_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ddopt {

// Row-major boolean occupancy grid. Cell (ix, iy) covers
// [origin + (ix, iy) * resolution, origin + (ix + 1, iy + 1) * resolution).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(double resolution, int width, int height,
                const Eigen::Vector2d& origin = Eigen::Vector2d::Zero());

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  std::size_t cell_count() const { return cells_.size(); }

  bool InBounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  bool Occupied(int ix, int iy) const {
    return cells_[Index(ix, iy)] != 0;
  }
  // Out-of-bounds cells count as occupied.
  bool Blocked(int ix, int iy) const {
    return !InBounds(ix, iy) || Occupied(ix, iy);
  }
  void SetOccupied(int ix, int iy, bool occupied = true) {
    cells_[Index(ix, iy)] = occupied ? 1 : 0;
  }

  Eigen::Vector2i WorldToCell(const Eigen::Vector2d& p) const;
  Eigen::Vector2d CellCenter(int ix, int iy) const;
  Eigen::Vector2d CellCenter(const Eigen::Vector2i& c) const {
    return CellCenter(c.x(), c.y());
  }
  bool ContainsPoint(const Eigen::Vector2d& p) const;

  // Marks every cell whose center lies inside the axis-aligned box [lo, hi].
  void FillBox(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
               bool occupied = true);
  // Marks the cell-index rectangle [x0, x1) x [y0, y1), clipped to the grid.
  void FillCells(int x0, int y0, int x1, int y1, bool occupied = true);

  std::size_t OccupiedCount() const;
  std::size_t Index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(ix);
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  double resolution_ = 0.1;
  int width_ = 0;
  int height_ = 0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  std::vector<std::uint8_t> cells_;
};

struct EsdfSample {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  // True when the query point was outside the interpolation domain and was
  // projected back onto it; the gradient then points into the map.
  bool clamped = false;
};

// Signed distance field over cell centers, in meters. Free cells hold the
// distance to the nearest occupied cell center. Occupied cells hold
// -(distance to the nearest free cell center - resolution), which is 0 on
// the obstacle boundary and negative deeper inside.
class EsdfMap {
 public:
  static constexpr double kFreeSpaceCap = 1e6;

  EsdfMap() = default;
  EsdfMap(OccupancyGrid grid, std::vector<double> dist);

  const OccupancyGrid& grid() const { return grid_; }
  double Distance(int ix, int iy) const { return dist_[grid_.Index(ix, iy)]; }
  const std::vector<double>& distances() const { return dist_; }

  // Bilinear interpolation between the four surrounding cell centers.
  EsdfSample Query(const Eigen::Vector2d& p) const;

 private:
  OccupancyGrid grid_;
  std::vector<double> dist_;
};

EsdfMap BuildEsdf(const OccupancyGrid& grid);

inline EsdfSample EsdfAt(const EsdfMap& map, const Eigen::Vector2d& p) {
  return map.Query(p);
}

// Squared Euclidean distance transform (in cells^2) of a binary mask: for
// every cell, the squared distance to the nearest cell whose mask is true.
// Cells are unreachable (no true cell) get +infinity.
std::vector<double> SquaredDistanceTransform(const std::vector<std::uint8_t>& mask,
                                             int width, int height);

enum class WorldKind { kSparse, kDense, kSpiral };

std::string_view ToString(WorldKind kind);
WorldKind ParseWorldKind(std::string_view name);

struct World {
  OccupancyGrid grid;
  // Suggested start pose (x, y, theta) used by the integral-error experiment.
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  // Number of randomly placed square obstacles (0 for the spiral).
  int obstacle_count = 0;
};

constexpr double kWorldSize = 20.0;
constexpr double kWorldResolution = 0.1;
constexpr int kSparseObstacles = 65;
constexpr double kSparseObstacleSize = 1.0;
constexpr int kDenseObstacles = 213;
constexpr double kDenseObstacleSize = 0.5;
constexpr double kSpiralWallThickness = 0.3;
constexpr double kSpiralChannelWidth = 1.2;

// Deterministic under `seed`. Generated worlds carry a one-cell perimeter
// wall so that the planner never leaves the map.
World GenerateWorld(WorldKind kind, std::uint64_t seed);

// Random square obstacles of side `size` placed without overlap, keeping a
// disk of `clear_radius` around `keep_clear` free.
OccupancyGrid GenerateRandomObstacles(int count, double size,
                                      std::uint64_t seed,
                                      const Eigen::Vector2d& keep_clear,
                                      double clear_radius);

// Plain-text map format:
//   resolution width height origin_x origin_y
//   `height` rows of `width` characters, '#' occupied, '.' free.
// The first row after the header is the top row (largest y).
OccupancyGrid ParseMap(std::istream& in);
OccupancyGrid LoadMap(const std::string& path);
void WriteMap(const OccupancyGrid& grid, std::ostream& out);
void SaveMap(const OccupancyGrid& grid, const std::string& path);

// Marks cells whose center lies within `radius` of an occupied cell center.
OccupancyGrid InflateGrid(const EsdfMap& esdf, double radius);

}  // namespace ddopt

#endif  // DDOPT_GRID_WORLD_HPP_
