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

#include "ddopt/dd_kinematics.hpp"

#include <cmath>
#include <numbers>

namespace ddopt {
namespace {

// sin(a)/a and its derivative, with series near zero.
void Sinc(double a, double* sc, double* dsc) {
  if (std::abs(a) < 1e-4) {
    const double a2 = a * a;
    *sc = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    *dsc = -a / 3.0 + a2 * a / 30.0;
    return;
  }
  const double s = std::sin(a);
  const double c = std::cos(a);
  *sc = s / a;
  *dsc = (a * c - s) / (a * a);
}

}  // namespace

Twist TwistFromWheels(double v_left, double v_right, const IcrParams& icr) {
  Twist t;
  t.omega = (v_right - v_left) / icr.separation();
  t.vx = 0.5 * (v_right + v_left) - 0.5 * t.omega * (icr.y_il + icr.y_ir);
  t.vy = -t.omega * icr.x_iv;
  return t;
}

WheelSpeeds WheelsFromTwist(double vx, double omega, const IcrParams& icr) {
  return {vx + omega * icr.y_ir, vx + omega * icr.y_il};
}

Pose Step(const Pose& pose, const Twist& twist, double dt) {
  return Step(pose, twist, dt, nullptr);
}

// The displacement of a constant twist over dt is
//   R(theta0 + a) * sinc(a) * dt * [vx, vy],  a = omega * dt / 2,
// which degrades gracefully to the straight-line update as omega -> 0.
Pose Step(const Pose& pose, const Twist& twist, double dt, StepJacobian* jac) {
  const double a = 0.5 * twist.omega * dt;
  double sc = 1.0;
  double dsc = 0.0;
  if (std::abs(twist.omega) >= 1e-9) Sinc(a, &sc, &dsc);
  const double phi = pose.z() + a;
  const double cphi = std::cos(phi);
  const double sphi = std::sin(phi);
  const double s = dt * sc * cphi;
  const double c = dt * sc * sphi;

  Pose out;
  out.x() = pose.x() + twist.vx * s - twist.vy * c;
  out.y() = pose.y() + twist.vx * c + twist.vy * s;
  out.z() = pose.z() + twist.omega * dt;

  if (jac != nullptr) {
    // dS/dtheta0 = -C, dC/dtheta0 = S; omega enters through a and phi.
    const double half = 0.5 * dt;
    const double ds_dw = dt * half * (dsc * cphi - sc * sphi);
    const double dc_dw = dt * half * (dsc * sphi + sc * cphi);
    jac->d_pose.setIdentity();
    jac->d_pose(0, 2) = -twist.vx * c - twist.vy * s;
    jac->d_pose(1, 2) = twist.vx * s - twist.vy * c;
    jac->d_twist.setZero();
    jac->d_twist(0, 0) = s;
    jac->d_twist(0, 1) = -c;
    jac->d_twist(0, 2) = twist.vx * ds_dw - twist.vy * dc_dw;
    jac->d_twist(1, 0) = c;
    jac->d_twist(1, 1) = s;
    jac->d_twist(1, 2) = twist.vx * dc_dw + twist.vy * ds_dw;
    jac->d_twist(2, 2) = dt;
  }
  return out;
}

double WrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

}  // namespace ddopt
