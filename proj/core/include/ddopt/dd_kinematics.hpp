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

#ifndef DDOPT_DD_KINEMATICS_HPP_
#define DDOPT_DD_KINEMATICS_HPP_

#include <Eigen/Core>

namespace ddopt {

// Instantaneous centers of rotation of the left track, right track and the
// body. A standard differential drive with wheelbase d has
// y_il = -y_ir = d / 2 and x_iv = 0.
struct IcrParams {
  double y_il = 0.3;
  double y_ir = -0.3;
  double x_iv = 0.0;

  double separation() const { return y_il - y_ir; }
  bool Valid() const { return separation() > 0.0; }
  friend bool operator==(const IcrParams&, const IcrParams&) = default;
};

// Body-frame twist. v_y is never independent: it equals -omega * x_iv.
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
};

// Pose (x, y, theta) in world coordinates.
using Pose = Eigen::Vector3d;

Twist TwistFromWheels(double v_left, double v_right, const IcrParams& icr);
inline Twist TwistFromWheels(const WheelSpeeds& w, const IcrParams& icr) {
  return TwistFromWheels(w.left, w.right, icr);
}
WheelSpeeds WheelsFromTwist(double vx, double omega, const IcrParams& icr);

// Body twist for a commanded forward speed and yaw rate, with the lateral
// slip implied by the body ICR.
inline Twist SlipTwist(double vx, double omega, const IcrParams& icr) {
  return {vx, -omega * icr.x_iv, omega};
}

// Exact integration of a constant body twist over dt.
Pose Step(const Pose& pose, const Twist& twist, double dt);

// Jacobians of Step with respect to the pose and to (vx, vy, omega).
struct StepJacobian {
  Eigen::Matrix3d d_pose;
  Eigen::Matrix3d d_twist;
};
Pose Step(const Pose& pose, const Twist& twist, double dt, StepJacobian* jac);

// Wraps an angle to (-pi, pi].
double WrapAngle(double a);

}  // namespace ddopt

#endif  // DDOPT_DD_KINEMATICS_HPP_
