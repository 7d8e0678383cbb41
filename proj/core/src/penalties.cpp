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

#include "ddopt/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {

void Limits::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, "limits: " + what);
  };
  if (!(v_max > 0.0)) fail("v_max must be > 0");
  if (!(v_min <= 0.0)) fail("v_min must be <= 0");
  if (!(omega_max > 0.0)) fail("omega_max must be > 0");
  if (!(a_max > 0.0)) fail("a_max must be > 0");
  if (!(alpha_max > 0.0)) fail("alpha_max must be > 0");
  if (!(safety_distance >= 0.0)) fail("safety_distance must be >= 0");
  if (!(eps_low >= 0.0 && eps_low < 1.0)) fail("eps_low must lie in [0, 1)");
  if (!(eps_upp > 1.0)) fail("eps_upp must be > 1");
  if (contour.empty()) fail("contour needs at least one point");
}

std::vector<Eigen::Vector2d> RectangleContour(double length, double width) {
  const double a = 0.5 * length;
  const double b = 0.5 * width;
  return {{a, b}, {a, -b}, {-a, b}, {-a, -b}, {a, 0}, {-a, 0}, {0, b}, {0, -b}};
}

Relaxed RelaxL1(double x, double delta) {
  if (x <= 0.0) return {0.0, 0.0};
  if (x <= delta) {
    const double r = x / delta;
    // x^3/d^2 - x^4/(2 d^3)
    return {x * r * r * (1.0 - 0.5 * r), r * r * (3.0 - 2.0 * r)};
  }
  return {x - 0.5 * delta, 1.0};
}

CouplingViolations VelocityCoupling(double v, double omega, const Limits& lim) {
  CouplingViolations out;
  for (int k = 0; k < 2; ++k) {
    const double eta = k == 0 ? -1.0 : 1.0;
    out.forward[k] = eta * omega * lim.v_max + lim.omega_max * v -
                     lim.v_max * lim.omega_max;
    out.reverse[k] = -eta * omega * lim.v_min - lim.omega_max * v +
                     lim.v_min * lim.omega_max;
  }
  return out;
}

AccelViolations AccelPenalties(double s_acc, double theta_acc, const Limits& lim) {
  return {s_acc * s_acc - lim.a_max * lim.a_max,
          theta_acc * theta_acc - lim.alpha_max * lim.alpha_max};
}

std::vector<SafetyViolation> SafetyPenalty(const Pose& pose, const EsdfMap& esdf,
                                           const Limits& lim) {
  std::vector<SafetyViolation> out(lim.contour.size());
  const double c = std::cos(pose.z());
  const double s = std::sin(pose.z());
  for (std::size_t l = 0; l < lim.contour.size(); ++l) {
    const Eigen::Vector2d& chi = lim.contour[l];
    const Eigen::Vector2d rchi(c * chi.x() - s * chi.y(), s * chi.x() + c * chi.y());
    const Eigen::Vector2d drchi(-rchi.y(), rchi.x());
    const EsdfSample e = esdf.Query(pose.head<2>() + rchi);
    out[l].value = lim.safety_distance - e.value;
    out[l].gradient << -e.gradient, -e.gradient.dot(drchi);
    out[l].clamped = e.clamped;
  }
  return out;
}

DurationViolations DurationBalance(const Eigen::VectorXd& durations,
                                   const Limits& lim) {
  const int m = static_cast<int>(durations.size());
  const double mean = durations.mean();
  DurationViolations out;
  out.lower = lim.eps_low * mean - durations.array();
  out.upper = durations.array() - lim.eps_upp * mean;
  out.jacobian.setZero(2 * m, m);
  out.jacobian.topRows(m).setConstant(lim.eps_low / m);
  out.jacobian.bottomRows(m).setConstant(-lim.eps_upp / m);
  for (int i = 0; i < m; ++i) {
    out.jacobian(i, i) -= 1.0;
    out.jacobian(m + i, i) += 1.0;
  }
  return out;
}

namespace {

// Gradient of a sampled term with respect to (theta, s) derivatives 0..2.
struct StateGrad {
  Eigen::Matrix<double, 3, 2> g = Eigen::Matrix<double, 3, 2>::Zero();
};

}  // namespace

PenaltyBreakdown Accumulate(const MsTrajectory& traj, const IntegrationCache& cache,
                            const EsdfMap* esdf, const ConstraintWeights& w,
                            const Limits& lim, const PenaltyMask& mask,
                            Eigen::MatrixX2d* d_coeffs, Eigen::VectorXd* d_durations,
                            std::vector<Eigen::Vector2d>* pos_grad) {
  cache.CheckCurrent(traj);
  if (mask.safety && esdf == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "safety penalty needs an ESDF");
  }
  const int m = traj.segments();
  const int n = cache.n();
  PenaltyBreakdown out;

  for (int i = 0; i < m; ++i) {
    const double dur = traj.durations()(i);
    Eigen::Matrix<double, 6, 1> dc_theta = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 1> dc_s = Eigen::Matrix<double, 6, 1>::Zero();
    double d_dur = 0.0;

    for (int j = 0; j <= n; ++j) {
      const double nu = (j == 0 || j == n) ? 0.5 : 1.0;
      const double frac = static_cast<double>(j) / n;
      const double t = frac * dur;
      const double base = dur / n * nu;  // trapezoid time weight
      const MotionState st = traj.EvalSegment(i, t, 3);
      Eigen::Matrix<double, 3, 2> g = Eigen::Matrix<double, 3, 2>::Zero();
      double relaxed_sum = 0.0;  // sum of weight * L1, for dT of base

      if (mask.velocity) {
        const double v = st(1, 1);
        const double om = st(1, 0);
        const CouplingViolations cv = VelocityCoupling(v, om, lim);
        for (int k = 0; k < 2; ++k) {
          const double eta = k == 0 ? -1.0 : 1.0;
          const Relaxed f = RelaxL1(cv.forward[k]);
          const Relaxed r = RelaxL1(cv.reverse[k]);
          const double val = w.velocity * (f.value + r.value);
          out.velocity += base * val;
          relaxed_sum += val;
          g(1, 0) += base * w.velocity * (f.slope * eta * lim.v_max -
                                          r.slope * eta * lim.v_min);
          g(1, 1) += base * w.velocity * (f.slope - r.slope) * lim.omega_max;
        }
      }
      if (mask.accel) {
        const AccelViolations av = AccelPenalties(st(2, 1), st(2, 0), lim);
        const Relaxed a = RelaxL1(av.linear);
        const Relaxed y = RelaxL1(av.yaw);
        out.accel += base * w.accel * a.value;
        out.yaw_accel += base * w.yaw_accel * y.value;
        relaxed_sum += w.accel * a.value + w.yaw_accel * y.value;
        g(2, 1) += base * w.accel * a.slope * 2.0 * st(2, 1);
        g(2, 0) += base * w.yaw_accel * y.slope * 2.0 * st(2, 0);
      }
      if (mask.safety) {
        const Eigen::Vector2d& p = cache.position(i, j);
        const Pose pose(p.x(), p.y(), st(0, 0));
        for (const SafetyViolation& sv : SafetyPenalty(pose, *esdf, lim)) {
          const Relaxed r = RelaxL1(sv.value);
          if (r.value == 0.0 && r.slope == 0.0) continue;
          out.safety += base * w.safety * r.value;
          relaxed_sum += w.safety * r.value;
          const double k = base * w.safety * r.slope;
          (*pos_grad)[static_cast<std::size_t>(i * (n + 1) + j)] +=
              k * sv.gradient.head<2>();
          g(0, 0) += k * sv.gradient.z();
        }
      }

      d_dur += relaxed_sum * nu / n;
      for (int k = 0; k < 3; ++k) {
        if (g(k, 0) != 0.0) dc_theta += g(k, 0) * Basis(t, k).transpose();
        if (g(k, 1) != 0.0) dc_s += g(k, 1) * Basis(t, k).transpose();
        // The sample time moves with T_i: d/dT sigma^(k)(j T / n) =
        // sigma^(k+1) j / n.
        d_dur += (g(k, 0) * st(k + 1, 0) + g(k, 1) * st(k + 1, 1)) * frac;
      }
    }
    d_coeffs->block<6, 1>(6 * i, 0) += dc_theta;
    d_coeffs->block<6, 1>(6 * i, 1) += dc_s;
    (*d_durations)(i) += d_dur;
  }

  if (mask.duration) {
    const DurationViolations dv = DurationBalance(traj.durations(), lim);
    for (int r = 0; r < 2 * m; ++r) {
      const double c = r < m ? dv.lower(r) : dv.upper(r - m);
      const Relaxed f = RelaxL1(c);
      if (f.slope == 0.0 && f.value == 0.0) continue;
      out.duration += w.duration * f.value;
      *d_durations += w.duration * f.slope * dv.jacobian.row(r).transpose();
    }
  }
  return out;
}

double MaxViolations::Worst() const {
  return std::max({velocity, accel, yaw_accel, safety, duration});
}

MaxViolations SampledViolations(const MsTrajectory& traj,
                                const IntegrationCache& cache, const EsdfMap* esdf,
                                const Limits& lim) {
  cache.CheckCurrent(traj);
  MaxViolations out;
  const int n = cache.n();
  for (int i = 0; i < traj.segments(); ++i) {
    const double dur = traj.durations()(i);
    for (int j = 0; j <= n; ++j) {
      const MotionState st = traj.EvalSegment(i, dur * j / n, 2);
      const CouplingViolations cv = VelocityCoupling(st(1, 1), st(1, 0), lim);
      for (int k = 0; k < 2; ++k) {
        out.velocity = std::max({out.velocity, cv.forward[k], cv.reverse[k]});
      }
      const AccelViolations av = AccelPenalties(st(2, 1), st(2, 0), lim);
      out.accel = std::max(out.accel, av.linear);
      out.yaw_accel = std::max(out.yaw_accel, av.yaw);
      if (esdf != nullptr) {
        const Eigen::Vector2d& p = cache.position(i, j);
        for (const SafetyViolation& sv :
             SafetyPenalty(Pose(p.x(), p.y(), st(0, 0)), *esdf, lim)) {
          out.safety = std::max(out.safety, sv.value);
        }
      }
    }
  }
  const DurationViolations dv = DurationBalance(traj.durations(), lim);
  out.duration = std::max(dv.lower.maxCoeff(), dv.upper.maxCoeff());
  return out;
}

Eigen::Vector2d FinalPositionResidual(const IntegrationCache& cache,
                                      const Eigen::Vector2d& goal) {
  return cache.final_position() - goal;
}

double AnchorPenalty(const IntegrationCache& cache,
                     const std::vector<Eigen::Vector2d>& anchors,
                     std::vector<Eigen::Vector2d>* pos_grad) {
  const int m = cache.segments();
  const int n = cache.n();
  if (static_cast<int>(anchors.size()) != m) {
    throw Error(ErrorCode::kShapeError, "need one anchor per segment");
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d d = cache.position(i, n) - anchors[static_cast<std::size_t>(i)];
    total += d.squaredNorm();
    if (pos_grad != nullptr) {
      (*pos_grad)[static_cast<std::size_t>(i * (n + 1) + n)] += 2.0 * d;
    }
  }
  return total;
}

}  // namespace ddopt
