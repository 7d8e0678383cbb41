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

#ifndef DDOPT_MS_TRAJECTORY_HPP_
#define DDOPT_MS_TRAJECTORY_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ddopt/dd_kinematics.hpp"

namespace ddopt {

// Control-effort order (jerk) and the resulting quintic segments.
constexpr int kEffortOrder = 3;
constexpr int kSegmentCoeffs = 2 * kEffortOrder;

// Monomial basis row [1, t, ..., t^5] differentiated `order` (0..3) times.
Eigen::Matrix<double, 1, kSegmentCoeffs> Basis(double t, int order);

// Derivatives of theta (column 0) and s (column 1), rows 0..3.
using MotionState = Eigen::Matrix<double, 4, 2>;

// Piecewise-quintic trajectory over heading theta and forward arc length s.
// Coefficients are stacked 6 per segment in ascending power, local time
// starts at 0 in every segment. theta is absolute; start_pose supplies the
// position the integration starts from (its heading is informational and
// should equal theta(0)).
class MsTrajectory {
 public:
  MsTrajectory() = default;
  MsTrajectory(Eigen::MatrixX2d coeffs, Eigen::VectorXd durations,
               const Pose& start_pose, const IcrParams& icr);

  int segments() const { return static_cast<int>(durations_.size()); }
  const Eigen::MatrixX2d& coeffs() const { return coeffs_; }
  const Eigen::VectorXd& durations() const { return durations_; }
  const Pose& start_pose() const { return start_pose_; }
  const IcrParams& icr() const { return icr_; }
  double total_duration() const { return total_; }
  std::uint64_t version() const { return version_; }

  void SetCoefficients(const Eigen::MatrixX2d& coeffs);
  void SetDurations(const Eigen::VectorXd& durations);
  void Set(const Eigen::MatrixX2d& coeffs, const Eigen::VectorXd& durations);
  void SetStartPose(const Pose& pose);
  void SetIcr(const IcrParams& icr);

  auto SegmentCoeffs(int i) const {
    return coeffs_.middleRows<kSegmentCoeffs>(kSegmentCoeffs * i);
  }
  // Segment containing t (junctions resolve to the later segment) and the
  // local time inside it.
  int Locate(double t, double* local) const;
  // Derivatives up to `order` (<= 3) of segment i at local time tau.
  MotionState EvalSegment(int i, double tau, int order = 3) const;

 private:
  void Validate() const;
  void Touch();

  Eigen::MatrixX2d coeffs_;
  Eigen::VectorXd durations_;
  Pose start_pose_ = Pose::Zero();
  IcrParams icr_;
  double total_ = 0.0;
  std::uint64_t version_ = 0;
};

// t outside [0, total] by more than 1e-9 throws OutOfDomain; within that
// tolerance it is clamped.
MotionState EvalState(const MsTrajectory& traj, double t, int order = 3);

// Position-integrand values at one Simpson sample plus the factors of its
// partial derivatives:
//   df_x/dc_theta = beta * ax + beta' * bx,   df_x/dc_s = beta' * cos
//   df_y/dc_theta = beta * ay + beta' * by,   df_y/dc_s = beta' * sin
struct IntegrandSample {
  double t = 0.0;
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  Eigen::Vector2d fdot = Eigen::Vector2d::Zero();
  double ax = 0.0, bx = 0.0, ay = 0.0, by = 0.0;
  double cos_theta = 1.0, sin_theta = 0.0;
};

IntegrandSample EvalIntegrand(const MsTrajectory& traj, int segment, double tau);

// Composite Simpson integration of the position with n intervals per segment
// (2n + 1 samples per segment, none shared across segments).
class IntegrationCache {
 public:
  int n() const { return n_; }
  int segments() const { return segments_; }
  std::uint64_t version() const { return version_; }

  // Sample k in [0, 2n] of segment i.
  const IntegrandSample& sample(int i, int k) const {
    return samples_[static_cast<std::size_t>(i * (2 * n_ + 1) + k)];
  }
  // Simpson summand f(a) + 4 f(mid) + f(b) of interval j in [1, n].
  const Eigen::Vector2d& gamma(int i, int j) const {
    return gamma_[static_cast<std::size_t>(i * n_ + j - 1)];
  }
  // Position at the start of interval j + 1 of segment i, j in [0, n].
  const Eigen::Vector2d& position(int i, int j) const {
    return positions_[static_cast<std::size_t>(i * (n_ + 1) + j)];
  }
  const Eigen::Vector2d& final_position() const { return positions_.back(); }
  std::size_t position_count() const { return positions_.size(); }

  // Throws StaleCache when traj has changed since integration.
  void CheckCurrent(const MsTrajectory& traj) const;

  // Analytic partials of Gamma_{i,j}: rows 0..5 theta coefficients, rows
  // 6..11 s coefficients; columns x and y.
  Eigen::Matrix<double, 2 * kSegmentCoeffs, 2> GammaCoeffPartials(int i,
                                                                  int j) const;
  Eigen::Vector2d GammaDurationPartial(int i, int j, double duration) const;

 private:
  friend IntegrationCache IntegratePositions(const MsTrajectory&, int);

  int n_ = 0;
  int segments_ = 0;
  std::uint64_t version_ = 0;
  std::vector<IntegrandSample> samples_;
  std::vector<Eigen::Vector2d> gamma_;
  std::vector<Eigen::Vector2d> positions_;
};

constexpr int kDefaultIntervals = 10;

IntegrationCache IntegratePositions(const MsTrajectory& traj,
                                    int n = kDefaultIntervals);

// Position at time t: nearest cached interval boundary <= t plus a fresh
// 3-point Simpson rule over the remainder.
Eigen::Vector2d PositionAt(const MsTrajectory& traj, const IntegrationCache& cache,
                           double t);

// Full pose (x, y, theta) at t.
Pose PoseAt(const MsTrajectory& traj, const IntegrationCache& cache, double t);

// Adds the effect of per-sample position gradients onto coefficient and
// duration gradients. `grad` holds dJ/d(position(i, j)) in the layout of
// IntegrationCache::position, i.e. segments() * (n + 1) entries.
void BackpropPositions(const MsTrajectory& traj, const IntegrationCache& cache,
                       const std::vector<Eigen::Vector2d>& grad,
                       Eigen::MatrixX2d* d_coeffs, Eigen::VectorXd* d_durations);

// Worst-case composite Simpson error: interval^5 / (180 n^4) * f4_max.
double SimpsonErrorBound(double f4_max, double interval, int n);

// Final position by Simpson with `n` intervals per segment, without
// building a cache. Used as a refined quadrature reference.
Eigen::Vector2d FinalPosition(const MsTrajectory& traj, int n);

}  // namespace ddopt

#endif  // DDOPT_MS_TRAJECTORY_HPP_
