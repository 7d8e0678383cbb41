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

#include "ddopt/ms_trajectory.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

std::atomic<std::uint64_t> g_next_version{1};

using Row6 = Eigen::Matrix<double, 1, kSegmentCoeffs>;

}  // namespace

Row6 Basis(double t, int order) {
  // Falling-factorial coefficients p! / (p - order)!.
  static constexpr double kFall[4][kSegmentCoeffs] = {
      {1, 1, 1, 1, 1, 1},
      {0, 1, 2, 3, 4, 5},
      {0, 0, 2, 6, 12, 20},
      {0, 0, 0, 6, 24, 60}};
  Row6 b = Row6::Zero();
  double tp = 1.0;
  for (int p = order; p < kSegmentCoeffs; ++p) {
    b(p) = kFall[order][p] * tp;
    tp *= t;
  }
  return b;
}

MsTrajectory::MsTrajectory(Eigen::MatrixX2d coeffs, Eigen::VectorXd durations,
                           const Pose& start_pose, const IcrParams& icr)
    : coeffs_(std::move(coeffs)),
      durations_(std::move(durations)),
      start_pose_(start_pose),
      icr_(icr) {
  Validate();
  Touch();
}

void MsTrajectory::Validate() const {
  if (durations_.size() < 1) {
    throw Error(ErrorCode::kShapeError, "trajectory needs at least one segment");
  }
  if (coeffs_.rows() != kSegmentCoeffs * durations_.size()) {
    throw Error(ErrorCode::kShapeError,
                "coefficient rows " + std::to_string(coeffs_.rows()) +
                    " do not match " + std::to_string(durations_.size()) +
                    " segments");
  }
  for (Eigen::Index i = 0; i < durations_.size(); ++i) {
    if (!(durations_(i) > 0.0) || !std::isfinite(durations_(i))) {
      throw Error(ErrorCode::kInvalidDuration,
                  "segment " + std::to_string(i) + " has non-positive duration");
    }
  }
}

void MsTrajectory::Touch() {
  total_ = durations_.sum();
  version_ = g_next_version.fetch_add(1, std::memory_order_relaxed);
}

void MsTrajectory::SetCoefficients(const Eigen::MatrixX2d& coeffs) {
  coeffs_ = coeffs;
  Validate();
  Touch();
}

void MsTrajectory::SetDurations(const Eigen::VectorXd& durations) {
  durations_ = durations;
  Validate();
  Touch();
}

void MsTrajectory::Set(const Eigen::MatrixX2d& coeffs,
                       const Eigen::VectorXd& durations) {
  coeffs_ = coeffs;
  durations_ = durations;
  Validate();
  Touch();
}

void MsTrajectory::SetStartPose(const Pose& pose) {
  start_pose_ = pose;
  Touch();
}

void MsTrajectory::SetIcr(const IcrParams& icr) {
  icr_ = icr;
  Touch();
}

int MsTrajectory::Locate(double t, double* local) const {
  const int m = segments();
  for (int i = 0; i < m - 1; ++i) {
    if (t < durations_(i)) {
      *local = std::max(t, 0.0);
      return i;
    }
    t -= durations_(i);
  }
  *local = std::min(std::max(t, 0.0), durations_(m - 1));
  return m - 1;
}

MotionState MsTrajectory::EvalSegment(int i, double tau, int order) const {
  MotionState out = MotionState::Zero();
  const auto c = SegmentCoeffs(i);
  for (int k = 0; k <= order && k <= 3; ++k) {
    out.row(k) = Basis(tau, k) * c;
  }
  return out;
}

MotionState EvalState(const MsTrajectory& traj, double t, int order) {
  constexpr double kTol = 1e-9;
  if (t < -kTol || t > traj.total_duration() + kTol) {
    throw Error(ErrorCode::kOutOfDomain,
                "time " + std::to_string(t) + " outside [0, " +
                    std::to_string(traj.total_duration()) + "]");
  }
  double tau = 0.0;
  const int i = traj.Locate(t, &tau);
  return traj.EvalSegment(i, tau, order);
}

IntegrandSample EvalIntegrand(const MsTrajectory& traj, int segment, double tau) {
  const MotionState st = traj.EvalSegment(segment, tau, 2);
  const double th = st(0, 0), dth = st(1, 0), ddth = st(2, 0);
  const double ds = st(1, 1), dds = st(2, 1);
  const double xiv = traj.icr().x_iv;
  const double c = std::cos(th);
  const double s = std::sin(th);

  IntegrandSample out;
  out.t = tau;
  out.cos_theta = c;
  out.sin_theta = s;
  out.f.x() = ds * c + xiv * dth * s;
  out.f.y() = ds * s - xiv * dth * c;
  out.fdot.x() = dds * c - ds * dth * s + xiv * (ddth * s + dth * dth * c);
  out.fdot.y() = dds * s + ds * dth * c + xiv * (dth * dth * s - ddth * c);
  out.ax = -ds * s + xiv * dth * c;
  out.bx = xiv * s;
  out.ay = ds * c + xiv * dth * s;
  out.by = -xiv * c;
  return out;
}

void IntegrationCache::CheckCurrent(const MsTrajectory& traj) const {
  if (traj.version() != version_ || traj.segments() != segments_) {
    throw Error(ErrorCode::kStaleCache,
                "integration cache does not match the trajectory version");
  }
}

Eigen::Matrix<double, 2 * kSegmentCoeffs, 2> IntegrationCache::GammaCoeffPartials(
    int i, int j) const {
  Eigen::Matrix<double, 2 * kSegmentCoeffs, 2> out =
      Eigen::Matrix<double, 2 * kSegmentCoeffs, 2>::Zero();
  const double weights[3] = {1.0, 4.0, 1.0};
  for (int l = 0; l < 3; ++l) {
    const IntegrandSample& smp = sample(i, 2 * j - 2 + l);
    const Row6 b0 = Basis(smp.t, 0) * weights[l];
    const Row6 b1 = Basis(smp.t, 1) * weights[l];
    out.block<kSegmentCoeffs, 1>(0, 0) += (b0 * smp.ax + b1 * smp.bx).transpose();
    out.block<kSegmentCoeffs, 1>(0, 1) += (b0 * smp.ay + b1 * smp.by).transpose();
    out.block<kSegmentCoeffs, 1>(kSegmentCoeffs, 0) +=
        (b1 * smp.cos_theta).transpose();
    out.block<kSegmentCoeffs, 1>(kSegmentCoeffs, 1) +=
        (b1 * smp.sin_theta).transpose();
  }
  return out;
}

Eigen::Vector2d IntegrationCache::GammaDurationPartial(int i, int j,
                                                       double /*duration*/) const {
  // Sample k sits at k T / (2n), so df(t_k)/dT = fdot(t_k) k / (2n).
  const double weights[3] = {1.0, 4.0, 1.0};
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int l = 0; l < 3; ++l) {
    const int k = 2 * j - 2 + l;
    out += weights[l] * sample(i, k).fdot * (static_cast<double>(k) / (2 * n_));
  }
  return out;
}

IntegrationCache IntegratePositions(const MsTrajectory& traj, int n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one interval");
  }
  IntegrationCache cache;
  const int m = traj.segments();
  cache.n_ = n;
  cache.segments_ = m;
  cache.version_ = traj.version();
  cache.samples_.resize(static_cast<std::size_t>(m) * (2 * n + 1));
  cache.gamma_.resize(static_cast<std::size_t>(m) * n);
  cache.positions_.resize(static_cast<std::size_t>(m) * (n + 1));

  Eigen::Vector2d p = traj.start_pose().head<2>();
  for (int i = 0; i < m; ++i) {
    const double dur = traj.durations()(i);
    for (int k = 0; k <= 2 * n; ++k) {
      cache.samples_[static_cast<std::size_t>(i * (2 * n + 1) + k)] =
          EvalIntegrand(traj, i, dur * k / (2.0 * n));
    }
    const double w = dur / (6.0 * n);
    cache.positions_[static_cast<std::size_t>(i * (n + 1))] = p;
    for (int j = 1; j <= n; ++j) {
      const Eigen::Vector2d g = cache.sample(i, 2 * j - 2).f +
                                4.0 * cache.sample(i, 2 * j - 1).f +
                                cache.sample(i, 2 * j).f;
      cache.gamma_[static_cast<std::size_t>(i * n + j - 1)] = g;
      p += w * g;
      cache.positions_[static_cast<std::size_t>(i * (n + 1) + j)] = p;
    }
  }
  return cache;
}

Eigen::Vector2d PositionAt(const MsTrajectory& traj, const IntegrationCache& cache,
                           double t) {
  cache.CheckCurrent(traj);
  constexpr double kTol = 1e-9;
  if (t < -kTol || t > traj.total_duration() + kTol) {
    throw Error(ErrorCode::kOutOfDomain,
                "time " + std::to_string(t) + " outside the trajectory");
  }
  double tau = 0.0;
  const int i = traj.Locate(t, &tau);
  const int n = cache.n();
  const double h = traj.durations()(i) / n;
  int j = static_cast<int>(std::floor(tau / h));
  j = std::max(0, std::min(j, n));
  const double rem = tau - j * h;
  Eigen::Vector2d p = cache.position(i, j);
  if (rem > 0.0) {
    const double a = j * h;
    const Eigen::Vector2d fa = EvalIntegrand(traj, i, a).f;
    const Eigen::Vector2d fm = EvalIntegrand(traj, i, a + 0.5 * rem).f;
    const Eigen::Vector2d fb = EvalIntegrand(traj, i, a + rem).f;
    p += rem / 6.0 * (fa + 4.0 * fm + fb);
  }
  return p;
}

Pose PoseAt(const MsTrajectory& traj, const IntegrationCache& cache, double t) {
  const Eigen::Vector2d p = PositionAt(traj, cache, t);
  return {p.x(), p.y(), EvalState(traj, t, 0)(0, 0)};
}

void BackpropPositions(const MsTrajectory& traj, const IntegrationCache& cache,
                       const std::vector<Eigen::Vector2d>& grad,
                       Eigen::MatrixX2d* d_coeffs, Eigen::VectorXd* d_durations) {
  cache.CheckCurrent(traj);
  const int m = traj.segments();
  const int n = cache.n();
  if (grad.size() != cache.position_count() ||
      d_coeffs->rows() != kSegmentCoeffs * m || d_durations->size() != m) {
    throw Error(ErrorCode::kShapeError, "position gradient has the wrong shape");
  }

  // A sample position depends on every interval before it, so interval j of
  // segment i receives the suffix sum of all later position gradients.
  std::vector<Eigen::Vector2d> sample_w(static_cast<std::size_t>(2 * n + 1));
  Eigen::Vector2d suffix = Eigen::Vector2d::Zero();
  for (int i = m - 1; i >= 0; --i) {
    const double dur = traj.durations()(i);
    const double scale = dur / (6.0 * n);
    std::fill(sample_w.begin(), sample_w.end(), Eigen::Vector2d::Zero());
    double dt = 0.0;
    for (int j = n; j >= 1; --j) {
      suffix += grad[static_cast<std::size_t>(i * (n + 1) + j)];
      dt += suffix.dot(cache.gamma(i, j)) / (6.0 * n);
      sample_w[2 * j - 2] += suffix;
      sample_w[2 * j - 1] += 4.0 * suffix;
      sample_w[2 * j] += suffix;
    }
    suffix += grad[static_cast<std::size_t>(i * (n + 1))];

    Row6 d_theta = Row6::Zero();
    Row6 d_s = Row6::Zero();
    for (int k = 0; k <= 2 * n; ++k) {
      const Eigen::Vector2d& w = sample_w[k];
      if (w.x() == 0.0 && w.y() == 0.0) continue;
      const IntegrandSample& smp = cache.sample(i, k);
      const Row6 b0 = Basis(smp.t, 0);
      const Row6 b1 = Basis(smp.t, 1);
      d_theta += b0 * (w.x() * smp.ax + w.y() * smp.ay) +
                 b1 * (w.x() * smp.bx + w.y() * smp.by);
      d_s += b1 * (w.x() * smp.cos_theta + w.y() * smp.sin_theta);
      dt += scale * w.dot(smp.fdot) * (static_cast<double>(k) / (2 * n));
    }
    d_coeffs->block<kSegmentCoeffs, 1>(kSegmentCoeffs * i, 0) +=
        scale * d_theta.transpose();
    d_coeffs->block<kSegmentCoeffs, 1>(kSegmentCoeffs * i, 1) +=
        scale * d_s.transpose();
    (*d_durations)(i) += dt;
  }
}

double SimpsonErrorBound(double f4_max, double interval, int n) {
  if (n < 1 || f4_max < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "need n >= 1 and f4_max >= 0");
  }
  const double n2 = static_cast<double>(n) * n;
  return std::pow(interval, 5) / (180.0 * n2 * n2) * f4_max;
}

Eigen::Vector2d FinalPosition(const MsTrajectory& traj, int n) {
  Eigen::Vector2d p = traj.start_pose().head<2>();
  for (int i = 0; i < traj.segments(); ++i) {
    const double dur = traj.durations()(i);
    const double h = dur / n;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    Eigen::Vector2d f_left = EvalIntegrand(traj, i, 0.0).f;
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d fm = EvalIntegrand(traj, i, (j + 0.5) * h).f;
      const Eigen::Vector2d fr = EvalIntegrand(traj, i, (j + 1) * h).f;
      acc += f_left + 4.0 * fm + fr;
      f_left = fr;
    }
    p += h / 6.0 * acc;
  }
  return p;
}

}  // namespace ddopt
