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

#ifndef DDOPT_METRICS_HPP_
#define DDOPT_METRICS_HPP_

#include <vector>

#include "ddopt/ms_trajectory.hpp"

namespace ddopt {

// Per-run figures of a planned trajectory. Kinematic means are time
// averages of absolute values, (1 / T) * integral |q| dt, on the Simpson
// grid of the trajectory.
struct RunMetrics {
  double computation_time = 0.0;  // seconds
  double length = 0.0;            // meters travelled by the body origin
  double duration = 0.0;          // seconds
  double mean_velocity = 0.0;     // length / duration
  bool success = false;
  double mean_linear_accel = 0.0;
  double mean_linear_jerk = 0.0;
  double mean_yaw_accel = 0.0;
  double mean_yaw_jerk = 0.0;
  double final_error = 0.0;
};

// Fills the trajectory-derived fields (length, duration, velocity and the
// four kinematic means); other fields are left as given.
void FillTrajectoryMetrics(const MsTrajectory& traj, RunMetrics* out,
                           int n = kDefaultIntervals);

// Five-number summary with Tukey whiskers (1.5 IQR) and outlier count.
struct BoxSummary {
  int count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  int outliers = 0;
};

// Quartiles by linear interpolation between order statistics.
double Quantile(std::vector<double> values, double q);
BoxSummary Summarize(const std::vector<double>& values);

}  // namespace ddopt

#endif  // DDOPT_METRICS_HPP_
