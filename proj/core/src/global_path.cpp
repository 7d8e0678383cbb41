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

#include "ddopt/global_path.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {

double PolylineLength(const std::vector<Eigen::Vector2d>& points) {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

double OctileDistance(const Eigen::Vector2i& a, const Eigen::Vector2i& b) {
  const int dx = std::abs(a.x() - b.x());
  const int dy = std::abs(a.y() - b.y());
  return std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy);
}

namespace {

class Jps {
 public:
  Jps(const OccupancyGrid& grid, const Eigen::Vector2i& goal) : grid_(grid), goal_(goal) {}

  bool Free(int x, int y) const { return !grid_.Blocked(x, y); }

  // First jump point reached by stepping (dx, dy) starting at (x, y).
  std::optional<Eigen::Vector2i> Jump(int x, int y, int dx, int dy) const {
    while (true) {
      if (!Free(x, y)) return std::nullopt;
      if (x == goal_.x() && y == goal_.y()) return Eigen::Vector2i(x, y);
      if (dx != 0 && dy != 0) {
        if (Jump(x + dx, y, dx, 0) || Jump(x, y + dy, 0, dy)) return Eigen::Vector2i(x, y);
        if (!(Free(x + dx, y) && Free(x, y + dy))) return std::nullopt;
      } else if (dx != 0) {
        if ((Free(x, y - 1) && !Free(x - dx, y - 1)) ||
            (Free(x, y + 1) && !Free(x - dx, y + 1))) {
          return Eigen::Vector2i(x, y);
        }
      } else {
        if ((Free(x - 1, y) && !Free(x - 1, y - dy)) ||
            (Free(x + 1, y) && !Free(x + 1, y - dy))) {
          return Eigen::Vector2i(x, y);
        }
      }
      x += dx;
      y += dy;
    }
  }

  // Pruned successor directions of (x, y) reached from `parent`.
  void Neighbors(int x, int y, const Eigen::Vector2i* parent,
                 std::vector<Eigen::Vector2i>* out) const {
    out->clear();
    auto push = [&](int nx, int ny) { out->emplace_back(nx, ny); };
    if (parent == nullptr) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!Free(x + dx, y + dy)) continue;
          if (dx != 0 && dy != 0 && !(Free(x + dx, y) && Free(x, y + dy))) continue;
          push(x + dx, y + dy);
        }
      }
      return;
    }
    const int dx = (x > parent->x()) - (x < parent->x());
    const int dy = (y > parent->y()) - (y < parent->y());
    if (dx != 0 && dy != 0) {
      const bool vert = Free(x, y + dy);
      const bool horz = Free(x + dx, y);
      if (vert) push(x, y + dy);
      if (horz) push(x + dx, y);
      if (vert && horz && Free(x + dx, y + dy)) push(x + dx, y + dy);
    } else if (dx != 0) {
      const bool next = Free(x + dx, y);
      const bool top = Free(x, y + 1);
      const bool bottom = Free(x, y - 1);
      if (next) {
        push(x + dx, y);
        if (top && Free(x + dx, y + 1)) push(x + dx, y + 1);
        if (bottom && Free(x + dx, y - 1)) push(x + dx, y - 1);
      }
      if (top) push(x, y + 1);
      if (bottom) push(x, y - 1);
    } else {
      const bool next = Free(x, y + dy);
      const bool right = Free(x + 1, y);
      const bool left = Free(x - 1, y);
      if (next) {
        push(x, y + dy);
        if (right && Free(x + 1, y + dy)) push(x + 1, y + dy);
        if (left && Free(x - 1, y + dy)) push(x - 1, y + dy);
      }
      if (right) push(x + 1, y);
      if (left) push(x - 1, y);
    }
  }

 private:
  const OccupancyGrid& grid_;
  Eigen::Vector2i goal_;
};

struct OpenEntry {
  double f;
  double h;
  std::uint64_t order;
  int node;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return order > o.order;
  }
};

}  // namespace

std::vector<Eigen::Vector2i> JpsSearchCells(const OccupancyGrid& grid,
                                            const Eigen::Vector2i& start,
                                            const Eigen::Vector2i& goal) {
  if (grid.Blocked(start.x(), start.y())) {
    throw Error(ErrorCode::kInvalidEndpoint, "start cell is occupied or outside the map");
  }
  if (grid.Blocked(goal.x(), goal.y())) {
    throw Error(ErrorCode::kInvalidEndpoint, "goal cell is occupied or outside the map");
  }
  if (start == goal) return {start};

  const int w = grid.width();
  auto id = [w](const Eigen::Vector2i& c) { return c.y() * w + c.x(); };
  auto cell = [w](int i) { return Eigen::Vector2i(i % w, i / w); };

  const std::size_t n = grid.cell_count();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  std::uint64_t order = 0;

  Jps jps(grid, goal);
  const int s = id(start);
  const int t = id(goal);
  g[static_cast<std::size_t>(s)] = 0.0;
  open.push({OctileDistance(start, goal), OctileDistance(start, goal), order++, s});
  std::vector<Eigen::Vector2i> nbrs;

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const auto u = static_cast<std::size_t>(top.node);
    if (closed[u]) continue;
    closed[u] = 1;
    if (top.node == t) break;
    const Eigen::Vector2i c = cell(top.node);
    Eigen::Vector2i par;
    const bool has_parent = parent[u] >= 0;
    if (has_parent) par = cell(parent[u]);
    jps.Neighbors(c.x(), c.y(), has_parent ? &par : nullptr, &nbrs);
    for (const Eigen::Vector2i& nb : nbrs) {
      const int dx = nb.x() - c.x();
      const int dy = nb.y() - c.y();
      const auto jp = jps.Jump(nb.x(), nb.y(), dx, dy);
      if (!jp) continue;
      const auto v = static_cast<std::size_t>(id(*jp));
      if (closed[v]) continue;
      const double ng = g[u] + OctileDistance(c, *jp);
      if (ng < g[v]) {
        g[v] = ng;
        parent[v] = top.node;
        const double h = OctileDistance(*jp, goal);
        open.push({ng + h, h, order++, static_cast<int>(v)});
      }
    }
  }
  if (!closed[static_cast<std::size_t>(t)]) {
    throw Error(ErrorCode::kNoPath, "goal is not reachable from start");
  }
  std::vector<Eigen::Vector2i> out;
  for (int v = t; v >= 0; v = parent[static_cast<std::size_t>(v)]) out.push_back(cell(v));
  std::reverse(out.begin(), out.end());
  return out;
}

GridPath JpsSearch(const OccupancyGrid& grid, const Eigen::Vector2d& start,
                   const Eigen::Vector2d& goal) {
  const Eigen::Vector2i sc = grid.WorldToCell(start);
  const Eigen::Vector2i gc = grid.WorldToCell(goal);
  const std::vector<Eigen::Vector2i> cells = JpsSearchCells(grid, sc, gc);
  GridPath path;
  path.points.reserve(cells.size() + 1);
  path.points.push_back(start);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    path.points.push_back(grid.CellCenter(cells[i]));
  }
  path.points.push_back(goal);
  path.length = PolylineLength(path.points);
  return path;
}

std::optional<Eigen::Vector2i> NearestFreeCell(const OccupancyGrid& grid,
                                               const Eigen::Vector2i& cell,
                                               int max_steps) {
  if (!grid.Blocked(cell.x(), cell.y())) return cell;
  // Grow square rings and pick the Euclidean-nearest free cell in the first
  // ring that has any.
  for (int r = 1; r <= max_steps; ++r) {
    std::optional<Eigen::Vector2i> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const Eigen::Vector2i c(cell.x() + dx, cell.y() + dy);
        if (grid.Blocked(c.x(), c.y())) continue;
        const double d = std::hypot(dx, dy);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

Eigen::Vector2d PolylinePoint(const std::vector<Eigen::Vector2d>& points, double a,
                              int* segment) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "empty polyline");
  int last_nonzero = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double len = (points[k + 1] - points[k]).norm();
    if (len <= 0.0) continue;
    last_nonzero = static_cast<int>(k);
    if (a < acc + len) {
      if (segment != nullptr) *segment = static_cast<int>(k);
      const double r = std::max(0.0, a - acc) / len;
      return points[k] + r * (points[k + 1] - points[k]);
    }
    acc += len;
  }
  if (segment != nullptr) *segment = last_nonzero;
  return points.back();
}

InitialGuess SeedTrajectory(const GridPath& path, const Pose& start_pose,
                            const SeedOptions& opt) {
  if (path.points.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "seed path needs at least two points");
  }
  InitialGuess guess;
  guess.start_pose = start_pose;
  guess.goal = path.points.back();
  guess.bc.initial << start_pose.z(), 0.0, opt.start_yaw_rate, opt.start_speed,
      opt.start_yaw_accel, opt.start_accel;
  guess.bc.final_state.setZero();

  const double length = PolylineLength(path.points);
  if (length < 1e-6) {
    // Nothing to traverse: a single in-place rotation segment.
    const double th_f =
        opt.goal_heading ? start_pose.z() + WrapAngle(*opt.goal_heading - start_pose.z())
                         : start_pose.z();
    guess.bc.final_state(0, 0) = th_f;
    guess.waypoints.resize(2, 0);
    guess.durations = Eigen::VectorXd::Constant(1, opt.initial_duration);
    guess.s_final = 0.0;
    guess.anchors = {guess.goal};
    return guess;
  }

  // Unwrapped tangent heading of every polyline segment.
  const std::size_t nseg = path.points.size() - 1;
  std::vector<double> heading(nseg, start_pose.z());
  double prev = start_pose.z();
  for (std::size_t k = 0; k < nseg; ++k) {
    const Eigen::Vector2d d = path.points[k + 1] - path.points[k];
    if (d.norm() <= 0.0) {
      heading[k] = prev;
      continue;
    }
    const double raw = std::atan2(d.y(), d.x());
    heading[k] = prev + WrapAngle(raw - prev);
    prev = heading[k];
  }

  const int m = std::max(3, static_cast<int>(std::ceil(length / opt.segment_length - 1e-9)));
  const double step = length / m;
  guess.waypoints.resize(2, m - 1);
  for (int k = 1; k < m; ++k) {
    int seg = 0;
    PolylinePoint(path.points, k * step, &seg);
    guess.waypoints(0, k - 1) = heading[static_cast<std::size_t>(seg)];
    guess.waypoints(1, k - 1) = k * step;
  }
  guess.anchors.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    guess.anchors[static_cast<std::size_t>(i)] =
        i == m - 1 ? path.points.back() : PolylinePoint(path.points, (i + 1) * step);
  }
  int last_seg = 0;
  PolylinePoint(path.points, length, &last_seg);
  const double th_end = heading[static_cast<std::size_t>(last_seg)];
  guess.bc.final_state(0, 0) =
      opt.goal_heading ? th_end + WrapAngle(*opt.goal_heading - th_end) : th_end;
  guess.durations = Eigen::VectorXd::Constant(m, opt.initial_duration);
  guess.s_final = length;
  return guess;
}

}  // namespace ddopt
