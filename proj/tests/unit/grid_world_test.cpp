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

#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ddopt/error.hpp"
#include "oracles.hpp"

namespace ddopt {
namespace {

TEST(OccupancyGridTest, WorldCellRoundTrip) {
  OccupancyGrid grid(0.1, 30, 20, Eigen::Vector2d(-1.0, 2.0));
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      const Eigen::Vector2i c = grid.WorldToCell(grid.CellCenter(x, y));
      EXPECT_EQ(c, Eigen::Vector2i(x, y));
    }
  }
  EXPECT_TRUE(grid.Blocked(-1, 0));
  EXPECT_FALSE(grid.Blocked(0, 0));
}

TEST(OccupancyGridTest, RejectsBadShape) {
  EXPECT_THROW(OccupancyGrid(0.0, 3, 3), Error);
  EXPECT_THROW(OccupancyGrid(0.1, 0, 3), Error);
}

TEST(EsdfTest, SingleCellNeighbourIsOneResolution) {
  OccupancyGrid grid(0.1, 9, 9);
  grid.SetOccupied(4, 4);
  const EsdfMap map = BuildEsdf(grid);
  EXPECT_DOUBLE_EQ(map.Distance(5, 4), 0.1);
  EXPECT_DOUBLE_EQ(map.Distance(4, 3), 0.1);
  EXPECT_DOUBLE_EQ(map.Distance(4, 4), 0.0);
  EXPECT_NEAR(map.Distance(6, 6), std::hypot(0.2, 0.2), 1e-15);
}

TEST(EsdfTest, AllFreeHitsCap) {
  const EsdfMap map = BuildEsdf(OccupancyGrid(0.1, 7, 5));
  for (double d : map.distances()) EXPECT_EQ(d, EsdfMap::kFreeSpaceCap);
}

TEST(EsdfTest, OccupiedCellsAreNonPositive) {
  OccupancyGrid grid(0.1, 12, 12);
  grid.FillCells(3, 3, 9, 9);
  const EsdfMap map = BuildEsdf(grid);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      if (grid.Occupied(x, y)) {
        EXPECT_LE(map.Distance(x, y), 0.0);
      } else {
        EXPECT_GT(map.Distance(x, y), 0.0);
      }
    }
  }
  EXPECT_DOUBLE_EQ(map.Distance(3, 5), 0.0);
  EXPECT_NEAR(map.Distance(5, 5), -0.2, 1e-15);
}

TEST(EsdfTest, MatchesBruteForceOnRandomGrids) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 64);
    const int h = 1 + static_cast<int>(rng() % 64);
    const double fill = 0.02 + 0.3 * (trial % 4) / 3.0;
    const OccupancyGrid grid = testing::RandomGrid(w, h, fill, rng());
    const EsdfMap map = BuildEsdf(grid);
    const std::vector<double> ref = testing::BruteForceEsdf(grid);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ASSERT_DOUBLE_EQ(map.distances()[i], ref[i]) << "trial " << trial << " cell " << i;
    }
  }
}

TEST(EsdfTest, DiscreteLipschitz) {
  const OccupancyGrid grid = testing::RandomGrid(40, 30, 0.1, 3);
  const EsdfMap map = BuildEsdf(grid);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    const int ax = rng() % 40, ay = rng() % 30, bx = rng() % 40, by = rng() % 30;
    const double d = (grid.CellCenter(ax, ay) - grid.CellCenter(bx, by)).norm();
    EXPECT_LE(std::abs(map.Distance(ax, ay) - map.Distance(bx, by)), d + 2 * 0.1 + 1e-12);
  }
}

TEST(EsdfQueryTest, NodeAndMidpoint) {
  OccupancyGrid grid(0.1, 10, 3);
  grid.SetOccupied(0, 1);
  const EsdfMap map = BuildEsdf(grid);
  // Centers of (1,1) and (2,1) have distances 0.1 and 0.2.
  const EsdfSample mid = map.Query(0.5 * (grid.CellCenter(1, 1) + grid.CellCenter(2, 1)));
  EXPECT_NEAR(mid.value, 0.15, 1e-12);
  const EsdfSample node = map.Query(grid.CellCenter(2, 1));
  EXPECT_NEAR(node.value, 0.2, 1e-12);
  // Central difference of the node's neighbours along x.
  EXPECT_NEAR(node.gradient.x(), (map.Distance(3, 1) - map.Distance(1, 1)) / 0.2, 1e-12);
  EXPECT_FALSE(node.clamped);
}

TEST(EsdfQueryTest, GradientMatchesFiniteDifferencesInsidePatch) {
  const OccupancyGrid grid = testing::RandomGrid(30, 30, 0.08, 5);
  const EsdfMap map = BuildEsdf(grid);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int k = 0; k < 200; ++k) {
    const int i = rng() % 29;
    const int j = rng() % 29;
    // Strictly inside the patch between centers (i, j) and (i+1, j+1).
    const Eigen::Vector2d p = grid.CellCenter(i, j) + 0.1 * Eigen::Vector2d(u(rng), u(rng));
    const EsdfSample s = map.Query(p);
    const double h = 1e-6;
    const double gx = (map.Query(p + Eigen::Vector2d(h, 0)).value -
                       map.Query(p - Eigen::Vector2d(h, 0)).value) / (2 * h);
    const double gy = (map.Query(p + Eigen::Vector2d(0, h)).value -
                       map.Query(p - Eigen::Vector2d(0, h)).value) / (2 * h);
    const Eigen::Vector2d fd(gx, gy);
    EXPECT_LE((fd - s.gradient).norm(), 1e-6 * std::max(1.0, s.gradient.norm()));
  }
}

TEST(EsdfQueryTest, CloseToBruteForceDistanceAnywhere) {
  const OccupancyGrid grid = testing::RandomGrid(40, 40, 0.05, 9);
  const EsdfMap map = BuildEsdf(grid);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 3.95);
  for (int k = 0; k < 300; ++k) {
    const Eigen::Vector2d p(u(rng), u(rng));
    double best = 1e9;
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        if (grid.Occupied(x, y)) best = std::min(best, (grid.CellCenter(x, y) - p).norm());
      }
    }
    const Eigen::Vector2i c = grid.WorldToCell(p);
    if (grid.Occupied(c.x(), c.y())) continue;
    EXPECT_NEAR(map.Query(p).value, best, 1.5 * 0.1);
  }
}

TEST(EsdfQueryTest, OutOfBoundsIsClampedWithInwardGradient) {
  OccupancyGrid grid(0.1, 10, 10);
  grid.SetOccupied(5, 5);
  const EsdfMap map = BuildEsdf(grid);
  const EsdfSample s = map.Query(Eigen::Vector2d(-1.0, 0.55));
  EXPECT_TRUE(s.clamped);
  EXPECT_EQ(s.gradient.x(), 1.0);
  EXPECT_NEAR(s.value, map.Query(Eigen::Vector2d(0.05, 0.55)).value, 1e-12);
  const EsdfSample t = map.Query(Eigen::Vector2d(0.55, 5.0));
  EXPECT_TRUE(t.clamped);
  EXPECT_EQ(t.gradient.y(), -1.0);
}

TEST(WorldTest, GenerationIsDeterministic) {
  EXPECT_EQ(GenerateWorld(WorldKind::kSparse, 42).grid, GenerateWorld(WorldKind::kSparse, 42).grid);
  EXPECT_FALSE(GenerateWorld(WorldKind::kSparse, 42).grid ==
               GenerateWorld(WorldKind::kSparse, 43).grid);
}

TEST(WorldTest, ObstacleCountsAndSize) {
  for (auto [kind, count, side] : {std::tuple{WorldKind::kSparse, 65, 10},
                                   std::tuple{WorldKind::kDense, 213, 5}}) {
    const World w = GenerateWorld(kind, 3);
    EXPECT_EQ(w.obstacle_count, count);
    EXPECT_EQ(w.grid.width(), 200);
    EXPECT_EQ(w.grid.height(), 200);
    // Interior occupancy is exactly count non-overlapping squares.
    std::size_t interior = 0;
    for (int y = 1; y < 199; ++y) {
      for (int x = 1; x < 199; ++x) interior += w.grid.Occupied(x, y);
    }
    EXPECT_EQ(interior, static_cast<std::size_t>(count * side * side));
  }
}

// Flood fill from the spiral start must reach the central free region.
TEST(WorldTest, SpiralCenterReachableFromEntrance) {
  const World w = GenerateWorld(WorldKind::kSpiral, 0);
  const OccupancyGrid& g = w.grid;
  const Eigen::Vector2i s = g.WorldToCell(w.start.head<2>());
  ASSERT_FALSE(g.Blocked(s.x(), s.y()));
  std::vector<std::uint8_t> seen(g.cell_count(), 0);
  std::queue<Eigen::Vector2i> q;
  q.push(s);
  seen[g.Index(s.x(), s.y())] = 1;
  while (!q.empty()) {
    const Eigen::Vector2i c = q.front();
    q.pop();
    const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& dd : d) {
      const int x = c.x() + dd[0], y = c.y() + dd[1];
      if (g.Blocked(x, y) || seen[g.Index(x, y)]) continue;
      seen[g.Index(x, y)] = 1;
      q.push({x, y});
    }
  }
  const Eigen::Vector2i center = g.WorldToCell(Eigen::Vector2d(10.0, 10.0));
  EXPECT_TRUE(seen[g.Index(center.x(), center.y())]);
  // Single channel: free cells are all reachable.
  std::size_t free_cells = 0, reached = 0;
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      if (!g.Occupied(x, y)) {
        ++free_cells;
        reached += seen[g.Index(x, y)];
      }
    }
  }
  EXPECT_EQ(free_cells, reached);
}

TEST(MapIoTest, RoundTrip) {
  const OccupancyGrid grid = testing::RandomGrid(17, 9, 0.3, 1);
  std::stringstream ss;
  WriteMap(grid, ss);
  EXPECT_EQ(ParseMap(ss), grid);
}

TEST(MapIoTest, MalformedNamesLineAndOffset) {
  std::stringstream ss("0.1 3 2 0 0\n..#\n.x.\n");
  try {
    ParseMap(ss);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 3, offset 1"), std::string::npos) << e.what();
  }
}

TEST(MapIoTest, FirstRowIsTop) {
  std::stringstream ss("0.5 2 2 0 0\n#.\n..\n");
  const OccupancyGrid g = ParseMap(ss);
  EXPECT_TRUE(g.Occupied(0, 1));
  EXPECT_FALSE(g.Occupied(0, 0));
}

}  // namespace
}  // namespace ddopt
