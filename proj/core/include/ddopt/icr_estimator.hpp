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

#ifndef DDOPT_ICR_ESTIMATOR_HPP_
#define DDOPT_ICR_ESTIMATOR_HPP_

#include <Eigen/Core>

#include <cstdint>

#include "ddopt/dd_kinematics.hpp"
#include "ddopt/report_io.hpp"

namespace ddopt {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Noise densities. process is per second, applied as Q * dt.
struct EkfNoise {
  Vector6d process = (Vector6d() << 1e-4, 1e-4, 1e-4, 1e-6, 1e-6, 1e-6).finished();
  Eigen::Vector3d observation = Eigen::Vector3d::Constant(1e-4);
};

// Mean is [x, y, theta, y_il, y_ir, x_iv].
struct EkfState {
  Vector6d mean = Vector6d::Zero();
  Matrix6d cov = Matrix6d::Identity();

  Pose pose() const { return mean.head<3>(); }
  IcrParams icr() const { return {mean(3), mean(4), mean(5)}; }
};

// Noise-free propagation of the augmented state under wheel speeds, with
// its Jacobian with respect to the state when jac is non-null.
Vector6d PropagateState(const Vector6d& state, double v_left, double v_right, double dt,
                        Matrix6d* jac);

// Pose and ICR estimator driven by wheel speeds and full-pose observations.
class IcrEstimator {
 public:
  static constexpr double kMinSeparation = 0.02;
  // 99% quantile of chi-square with 3 degrees of freedom.
  static constexpr double kGate = 11.344866730144373;

  IcrEstimator(const Pose& pose, const IcrParams& icr, const Matrix6d& cov0,
               const EkfNoise& noise = {});

  // Throws InvalidArgument when dt <= 0.
  void Predict(double v_left, double v_right, double dt);
  // Returns false when the observation fails the gate (state unchanged).
  bool Update(const Pose& observation);

  const EkfState& state() const { return state_; }
  const EkfNoise& noise() const { return noise_; }
  int rejected() const { return rejected_; }
  double last_mahalanobis() const { return last_d2_; }

 private:
  void Symmetrize();

  EkfState state_;
  EkfNoise noise_;
  int rejected_ = 0;
  double last_d2_ = 0.0;
};

// Synthetic run: a plant with the true ICR follows a figure-eight (forward
// speed constant, yaw rate a sine) and reports noisy full-pose observations.
struct EstimatorSimConfig {
  IcrParams truth{0.3, -0.3, 0.2};
  IcrParams initial{0.25, -0.25, 0.0};
  // Prior variances of [x, y, theta, y_il, y_ir, x_iv].
  Vector6d prior = (Vector6d() << 1e-4, 1e-4, 1e-4, 1e-2, 1e-2, 1e-2).finished();
  double duration = 60.0;
  double rate = 50.0;
  double speed = 1.0;
  double yaw_rate = 1.0;  // amplitude; 0 gives straight driving
  double period = 12.0;
  // Observation noise standard deviations (m, m, rad).
  Eigen::Vector3d observation_sigma = Eigen::Vector3d::Constant(0.01);
  EkfNoise noise;
};

struct EstimatorRun {
  // t, x, y, theta, y_il, y_ir, x_iv, var_x, var_y, var_theta, var_y_il,
  // var_y_ir, var_x_iv, rejected
  Table log;
  EkfState final_state;
  double min_eigenvalue = 0.0;  // over all steps
  int rejected = 0;
};

EstimatorRun SimulateEstimator(const EstimatorSimConfig& cfg, std::uint64_t seed);

}  // namespace ddopt

#endif  // DDOPT_ICR_ESTIMATOR_HPP_
