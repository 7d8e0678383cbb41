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

#ifndef DDOPT_TRAJECTORY_IO_HPP_
#define DDOPT_TRAJECTORY_IO_HPP_

#include <string>

#include "ddopt/ms_trajectory.hpp"

namespace ddopt {

// JSON layout documented in docs/format.md.
std::string TrajectoryToJson(const MsTrajectory& traj, int indent = 2);
MsTrajectory TrajectoryFromJson(const std::string& text);

void SaveTrajectory(const MsTrajectory& traj, const std::string& path);
MsTrajectory LoadTrajectory(const std::string& path);

}  // namespace ddopt

#endif  // DDOPT_TRAJECTORY_IO_HPP_
