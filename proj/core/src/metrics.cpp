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

#include "ddopt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ddopt/error.hpp"

namespace ddopt {

void FillTrajectoryMetrics(const MsTrajectory& traj, RunMetrics* out, int n) {
  double len = 0.0, la = 0.0, lj = 0.0, ya = 0.0, yj = 0.0;
  for (int i = 0; i < traj.segments(); ++i) {
    const double dur = traj.durations()(i);
    const double h = dur / (2 * n);
    for (int k = 0; k <= 2 * n; ++k) {
      const double w = ((k == 0 || k == 2 * n) ? 1.0 : (k % 2 ? 4.0 : 2.0)) * h / 3.0;
      const MotionState st = traj.EvalSegment(i, k * h, 3);
      // Body-origin speed includes the lateral slip -omega * x_iv.
      len += w * std::hypot(st(1, 1), st(1, 0) * traj.icr().x_iv);
      la += w * std::abs(st(2, 1));
      lj += w * std::abs(st(3, 1));
      ya += w * std::abs(st(2, 0));
      yj += w * std::abs(st(3, 0));
    }
  }
  const double total = traj.total_duration();
  out->length = len;
  out->duration = total;
  out->mean_velocity = total > 0.0 ? len / total : 0.0;
  const double inv = total > 0.0 ? 1.0 / total : 0.0;
  out->mean_linear_accel = la * inv;
  out->mean_linear_jerk = lj * inv;
  out->mean_yaw_accel = ya * inv;
  out->mean_yaw_jerk = yj * inv;
}

double Quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "quantile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BoxSummary Summarize(const std::vector<double>& values) {
  BoxSummary b;
  b.count = static_cast<int>(values.size());
  if (values.empty()) return b;
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  b.min = v.front();
  b.max = v.back();
  b.q1 = Quantile(v, 0.25);
  b.median = Quantile(v, 0.5);
  b.q3 = Quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr;
  const double hi = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.max;
  b.upper_whisker = b.min;
  for (double x : v) {
    if (x < lo || x > hi) {
      ++b.outliers;
    } else {
      b.lower_whisker = std::min(b.lower_whisker, x);
      b.upper_whisker = std::max(b.upper_whisker, x);
    }
  }
  return b;
}

}  // namespace ddopt
