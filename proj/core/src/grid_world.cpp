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

#include "ddopt/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over the finite
// entries of f; entries equal to +inf are skipped.
void DistanceTransform1d(const double* f, int n, std::ptrdiff_t stride,
                         double* out, std::vector<int>& v,
                         std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[q * stride];
    if (fq == kInf) continue;
    while (k >= 0) {
      const int p = v[k];
      const double s = ((fq + double(q) * q) - (f[p * stride] + double(p) * p)) /
                       (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : ((fq + double(q) * q) -
                             (f[v[k - 1] * stride] + double(v[k - 1]) * v[k - 1])) /
                                (2.0 * (q - v[k - 1]));
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q * stride] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q * stride] = d * d + f[v[j] * stride];
  }
}

}  // namespace

OccupancyGrid::OccupancyGrid(double resolution, int width, int height,
                             const Eigen::Vector2d& origin)
    : resolution_(resolution), width_(width), height_(height), origin_(origin) {
  if (!(resolution > 0.0) || width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "occupancy grid needs resolution > 0 and at least one cell");
  }
  cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

Eigen::Vector2i OccupancyGrid::WorldToCell(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d rel = (p - origin_) / resolution_;
  return {static_cast<int>(std::floor(rel.x())),
          static_cast<int>(std::floor(rel.y()))};
}

Eigen::Vector2d OccupancyGrid::CellCenter(int ix, int iy) const {
  return origin_ + resolution_ * Eigen::Vector2d(ix + 0.5, iy + 0.5);
}

bool OccupancyGrid::ContainsPoint(const Eigen::Vector2d& p) const {
  const Eigen::Vector2i c = WorldToCell(p);
  return InBounds(c.x(), c.y());
}

void OccupancyGrid::FillBox(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                            bool occupied) {
  const Eigen::Vector2d a = (lo - origin_) / resolution_;
  const Eigen::Vector2d b = (hi - origin_) / resolution_;
  // Cell centers at index + 0.5 inside [a, b].
  const int x0 = static_cast<int>(std::ceil(a.x() - 0.5 - 1e-9));
  const int y0 = static_cast<int>(std::ceil(a.y() - 0.5 - 1e-9));
  const int x1 = static_cast<int>(std::floor(b.x() - 0.5 + 1e-9)) + 1;
  const int y1 = static_cast<int>(std::floor(b.y() - 0.5 + 1e-9)) + 1;
  FillCells(x0, y0, x1, y1, occupied);
}

void OccupancyGrid::FillCells(int x0, int y0, int x1, int y1, bool occupied) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, width_);
  y1 = std::min(y1, height_);
  for (int iy = y0; iy < y1; ++iy) {
    for (int ix = x0; ix < x1; ++ix) SetOccupied(ix, iy, occupied);
  }
}

std::size_t OccupancyGrid::OccupiedCount() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](auto c) { return c != 0; }));
}

std::vector<double> SquaredDistanceTransform(const std::vector<std::uint8_t>& mask,
                                             int width, int height) {
  std::vector<double> f(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 0.0 : kInf;

  const int longest = std::max(width, height);
  std::vector<int> v(longest);
  std::vector<double> z(longest + 1);
  std::vector<double> tmp(mask.size());

  // Columns first (stride = width), then rows.
  for (int ix = 0; ix < width; ++ix) {
    DistanceTransform1d(f.data() + ix, height, width, tmp.data() + ix, v, z);
  }
  for (int iy = 0; iy < height; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * width;
    DistanceTransform1d(tmp.data() + row, width, 1, f.data() + row, v, z);
  }
  return f;
}

EsdfMap::EsdfMap(OccupancyGrid grid, std::vector<double> dist)
    : grid_(std::move(grid)), dist_(std::move(dist)) {}

EsdfMap BuildEsdf(const OccupancyGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<std::uint8_t> occ(grid.cell_count());
  std::vector<std::uint8_t> free_mask(grid.cell_count());
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      const std::size_t i = grid.Index(ix, iy);
      occ[i] = grid.Occupied(ix, iy) ? 1 : 0;
      free_mask[i] = occ[i] ? 0 : 1;
    }
  }
  const std::vector<double> to_occ = SquaredDistanceTransform(occ, w, h);
  const std::vector<double> to_free = SquaredDistanceTransform(free_mask, w, h);

  const double res = grid.resolution();
  std::vector<double> dist(grid.cell_count());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (occ[i]) {
      dist[i] = to_free[i] == kInf ? -EsdfMap::kFreeSpaceCap
                                   : -(std::sqrt(to_free[i]) * res - res);
    } else {
      dist[i] = to_occ[i] == kInf
                    ? EsdfMap::kFreeSpaceCap
                    : std::min(std::sqrt(to_occ[i]) * res, EsdfMap::kFreeSpaceCap);
    }
  }
  return EsdfMap(grid, std::move(dist));
}

EsdfSample EsdfMap::Query(const Eigen::Vector2d& p) const {
  EsdfSample out;
  const int w = grid_.width();
  const int h = grid_.height();
  const double res = grid_.resolution();
  double u = (p.x() - grid_.origin().x()) / res - 0.5;
  double v = (p.y() - grid_.origin().y()) / res - 0.5;

  double inward_x = 0.0;
  double inward_y = 0.0;
  if (u < 0.0) {
    u = 0.0;
    inward_x = 1.0;
  } else if (u > w - 1) {
    u = w - 1;
    inward_x = -1.0;
  }
  if (v < 0.0) {
    v = 0.0;
    inward_y = 1.0;
  } else if (v > h - 1) {
    v = h - 1;
    inward_y = -1.0;
  }
  out.clamped = inward_x != 0.0 || inward_y != 0.0;

  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  if (w > 1) i0 = std::min(i0, w - 2);
  if (h > 1) j0 = std::min(j0, h - 2);
  const int i1 = std::min(i0 + 1, w - 1);
  const int j1 = std::min(j0 + 1, h - 1);
  const double fx = w > 1 ? u - i0 : 0.0;
  const double fy = h > 1 ? v - j0 : 0.0;

  const double d00 = Distance(i0, j0);
  const double d10 = Distance(i1, j0);
  const double d01 = Distance(i0, j1);
  const double d11 = Distance(i1, j1);

  out.value = (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 +
              (1 - fx) * fy * d01 + fx * fy * d11;
  double gx = ((d10 - d00) * (1 - fy) + (d11 - d01) * fy) / res;
  double gy = ((d01 - d00) * (1 - fx) + (d11 - d10) * fx) / res;

  // At a node the patch derivative is one-sided; average with the
  // neighbouring patch to get the central difference.
  if (fx == 0.0 && i0 > 0 && w > 1) {
    const double l0 = Distance(i0 - 1, j0);
    const double l1 = Distance(i0 - 1, j1);
    const double g_left = ((d00 - l0) * (1 - fy) + (d01 - l1) * fy) / res;
    gx = 0.5 * (gx + g_left);
  }
  if (fy == 0.0 && j0 > 0 && h > 1) {
    const double b0 = Distance(i0, j0 - 1);
    const double b1 = Distance(i1, j0 - 1);
    const double g_below = ((d00 - b0) * (1 - fx) + (d10 - b1) * fx) / res;
    gy = 0.5 * (gy + g_below);
  }
  if (inward_x != 0.0) gx = inward_x;
  if (inward_y != 0.0) gy = inward_y;
  out.gradient = {gx, gy};
  return out;
}

std::string_view ToString(WorldKind kind) {
  switch (kind) {
    case WorldKind::kSparse: return "sparse";
    case WorldKind::kDense: return "dense";
    case WorldKind::kSpiral: return "spiral";
  }
  return "unknown";
}

WorldKind ParseWorldKind(std::string_view name) {
  if (name == "sparse") return WorldKind::kSparse;
  if (name == "dense") return WorldKind::kDense;
  if (name == "spiral") return WorldKind::kSpiral;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown world kind '" + std::string(name) + "'");
}

namespace {

int Cells(double meters) {
  return static_cast<int>(std::lround(meters / kWorldResolution));
}

void AddPerimeter(OccupancyGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  grid.FillCells(0, 0, w, 1);
  grid.FillCells(0, h - 1, w, h);
  grid.FillCells(0, 0, 1, h);
  grid.FillCells(w - 1, 0, w, h);
}

OccupancyGrid SpiralGrid() {
  const int n = Cells(kWorldSize);
  const int t = Cells(kSpiralWallThickness);
  const int pitch = t + Cells(kSpiralChannelWidth);
  OccupancyGrid grid(kWorldResolution, n, n);
  AddPerimeter(grid);

  // Loop k is a rectangular wall ring [lo, hi + t) shrunk by one pitch per
  // loop. Each ring's left wall stops one pitch above its bottom so that the
  // channel continues inward; the bottom wall of ring k reaches back to the
  // left wall of ring k - 1. The outermost left wall is closed, making the
  // bottom-left corner a dead end where the robot starts.
  for (int k = 0;; ++k) {
    const int lo = k * pitch;
    const int hi = n - t - k * pitch;
    if (hi - lo < 2 * pitch) break;
    const int bottom_x0 = k == 0 ? 0 : lo - pitch;
    grid.FillCells(bottom_x0, lo, hi + t, lo + t);  // bottom
    grid.FillCells(hi, lo, hi + t, hi + t);         // right
    grid.FillCells(lo, hi, hi + t, hi + t);         // top
    const int left_y0 = k == 0 ? 0 : lo + pitch;
    grid.FillCells(lo, left_y0, lo + t, hi + t);    // left
  }
  return grid;
}

}  // namespace

OccupancyGrid GenerateRandomObstacles(int count, double size, std::uint64_t seed,
                                      const Eigen::Vector2d& keep_clear,
                                      double clear_radius) {
  const int n = Cells(kWorldSize);
  const int s = Cells(size);
  OccupancyGrid grid(kWorldResolution, n, n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, n - 1 - s);

  int placed = 0;
  int attempts = 0;
  const int max_attempts = 200000;
  while (placed < count) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::kInvalidArgument,
                  "could not place the requested number of obstacles");
    }
    const int x0 = pick(rng);
    const int y0 = pick(rng);
    bool overlaps = false;
    for (int iy = y0; iy < y0 + s && !overlaps; ++iy) {
      for (int ix = x0; ix < x0 + s; ++ix) {
        if (grid.Occupied(ix, iy)) {
          overlaps = true;
          break;
        }
      }
    }
    if (overlaps) continue;
    const Eigen::Vector2d lo = grid.origin() + kWorldResolution * Eigen::Vector2d(x0, y0);
    const Eigen::Vector2d hi = lo + Eigen::Vector2d::Constant(s * kWorldResolution);
    const Eigen::Vector2d nearest = keep_clear.cwiseMax(lo).cwiseMin(hi);
    if ((nearest - keep_clear).norm() < clear_radius) continue;
    grid.FillCells(x0, y0, x0 + s, y0 + s);
    ++placed;
  }
  AddPerimeter(grid);
  return grid;
}

World GenerateWorld(WorldKind kind, std::uint64_t seed) {
  World world;
  switch (kind) {
    case WorldKind::kSparse:
      world.start = {1.5, 1.5, M_PI / 4.0};
      world.grid = GenerateRandomObstacles(kSparseObstacles, kSparseObstacleSize,
                                           seed, world.start.head<2>(), 1.0);
      world.obstacle_count = kSparseObstacles;
      break;
    case WorldKind::kDense:
      world.start = {1.5, 1.5, M_PI / 4.0};
      world.grid = GenerateRandomObstacles(kDenseObstacles, kDenseObstacleSize,
                                           seed, world.start.head<2>(), 1.0);
      world.obstacle_count = kDenseObstacles;
      break;
    case WorldKind::kSpiral: {
      world.grid = SpiralGrid();
      const double half_lane = kSpiralWallThickness + 0.5 * kSpiralChannelWidth;
      world.start = {half_lane + 0.3, half_lane, 0.0};
      world.obstacle_count = 0;
      break;
    }
  }
  return world;
}

OccupancyGrid ParseMap(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) {
    throw Error(ErrorCode::kParseError, "line 1: missing header");
  }
  std::istringstream header(line);
  double res = 0.0, ox = 0.0, oy = 0.0;
  int w = 0, h = 0;
  if (!(header >> res >> w >> h >> ox >> oy) || res <= 0.0 || w < 1 || h < 1) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_no) +
                    ": expected 'resolution width height origin_x origin_y'");
  }
  OccupancyGrid grid(res, w, h, {ox, oy});
  for (int row = 0; row < h; ++row) {
    if (!next_line()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no + 1) + ": expected " +
                      std::to_string(h) + " map rows, got " + std::to_string(row));
    }
    if (static_cast<int>(line.size()) != w) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": row has " +
                      std::to_string(line.size()) + " characters, expected " +
                      std::to_string(w));
    }
    const int iy = h - 1 - row;
    for (int ix = 0; ix < w; ++ix) {
      const char c = line[static_cast<std::size_t>(ix)];
      if (c == '#') {
        grid.SetOccupied(ix, iy);
      } else if (c != '.') {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ", offset " +
                        std::to_string(ix) + ": unexpected character '" +
                        std::string(1, c) + "'");
      }
    }
  }
  return grid;
}

OccupancyGrid LoadMap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open map file " + path);
  return ParseMap(in);
}

void WriteMap(const OccupancyGrid& grid, std::ostream& out) {
  out.precision(17);
  out << grid.resolution() << ' ' << grid.width() << ' ' << grid.height() << ' '
      << grid.origin().x() << ' ' << grid.origin().y() << '\n';
  std::string row(static_cast<std::size_t>(grid.width()), '.');
  for (int iy = grid.height() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      row[static_cast<std::size_t>(ix)] = grid.Occupied(ix, iy) ? '#' : '.';
    }
    out << row << '\n';
  }
}

void SaveMap(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write map file " + path);
  WriteMap(grid, out);
}

OccupancyGrid InflateGrid(const EsdfMap& esdf, double radius) {
  OccupancyGrid out = esdf.grid();
  for (int iy = 0; iy < out.height(); ++iy) {
    for (int ix = 0; ix < out.width(); ++ix) {
      if (esdf.Distance(ix, iy) <= radius) out.SetOccupied(ix, iy);
    }
  }
  return out;
}

}  // namespace ddopt
