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

#include "ddopt/minco.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {

void BandedMatrix::Resize(int n, int lower, int upper) {
  n_ = n;
  lower_ = lower;
  upper_ = upper;
  data_.assign(static_cast<std::size_t>(lower + upper + 1) * n, 0.0);
}

void BandedMatrix::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool BandedMatrix::Factorize(double min_pivot) {
  for (int k = 0; k < n_; ++k) {
    const double pivot = (*this)(k, k);
    if (!(std::abs(pivot) >= min_pivot)) return false;
    const int i_end = std::min(k + lower_, n_ - 1);
    const int j_end = std::min(k + upper_, n_ - 1);
    for (int i = k + 1; i <= i_end; ++i) {
      double& lik = (*this)(i, k);
      if (lik == 0.0) continue;
      lik /= pivot;
      for (int j = k + 1; j <= j_end; ++j) (*this)(i, j) -= lik * (*this)(k, j);
    }
  }
  return true;
}

void BandedMatrix::Solve(Eigen::MatrixX2d& b) const {
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - lower_); j < i; ++j) {
      b.row(i) -= (*this)(i, j) * b.row(j);
    }
  }
  for (int i = n_ - 1; i >= 0; --i) {
    for (int j = i + 1; j <= std::min(n_ - 1, i + upper_); ++j) {
      b.row(i) -= (*this)(i, j) * b.row(j);
    }
    b.row(i) /= (*this)(i, i);
  }
}

void BandedMatrix::SolveTransposed(Eigen::MatrixX2d& b) const {
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - upper_); j < i; ++j) {
      b.row(i) -= (*this)(j, i) * b.row(j);
    }
    b.row(i) /= (*this)(i, i);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    for (int j = i + 1; j <= std::min(n_ - 1, i + lower_); ++j) {
      b.row(i) -= (*this)(j, i) * b.row(j);
    }
  }
}

Eigen::MatrixXd BandedMatrix::ToDense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) {
      d(i, j) = (*this)(i, j);
    }
  }
  return d;
}

void Minco::Setup(const BoundaryConditions& bc, int segments) {
  if (segments < 1) {
    throw Error(ErrorCode::kShapeError, "need at least one segment");
  }
  bc_ = bc;
  m_ = segments;
  band_.Resize(kSegmentCoeffs * m_, kSegmentCoeffs, kSegmentCoeffs);
  coeffs_.setZero(kSegmentCoeffs * m_, 2);
  durations_.setZero(m_);
}

// Row layout (6M rows): 0..2 initial derivatives 0..2; for junction i rows
// 6i+3 .. 6i+8 hold jerk continuity, snap continuity, waypoint value,
// then continuity of value, velocity and acceleration; the last three rows
// are the final derivatives 0..2. Row 6M-3 therefore carries s_f.
void Minco::Assemble() {
  band_.SetZero();
  BandedMatrix& a = band_;
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  for (int i = 0; i < m_ - 1; ++i) {
    const double t1 = durations_(i);
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    const int r = 6 * i + 3;
    const int c = 6 * i;
    a(r, c + 3) = 6.0;
    a(r, c + 4) = 24.0 * t1;
    a(r, c + 5) = 60.0 * t2;
    a(r, c + 9) = -6.0;
    a(r + 1, c + 4) = 24.0;
    a(r + 1, c + 5) = 120.0 * t1;
    a(r + 1, c + 10) = -24.0;
    a(r + 2, c) = 1.0;
    a(r + 2, c + 1) = t1;
    a(r + 2, c + 2) = t2;
    a(r + 2, c + 3) = t3;
    a(r + 2, c + 4) = t4;
    a(r + 2, c + 5) = t5;
    a(r + 3, c) = 1.0;
    a(r + 3, c + 1) = t1;
    a(r + 3, c + 2) = t2;
    a(r + 3, c + 3) = t3;
    a(r + 3, c + 4) = t4;
    a(r + 3, c + 5) = t5;
    a(r + 3, c + 6) = -1.0;
    a(r + 4, c + 1) = 1.0;
    a(r + 4, c + 2) = 2.0 * t1;
    a(r + 4, c + 3) = 3.0 * t2;
    a(r + 4, c + 4) = 4.0 * t3;
    a(r + 4, c + 5) = 5.0 * t4;
    a(r + 4, c + 7) = -1.0;
    a(r + 5, c + 2) = 2.0;
    a(r + 5, c + 3) = 6.0 * t1;
    a(r + 5, c + 4) = 12.0 * t2;
    a(r + 5, c + 5) = 20.0 * t3;
    a(r + 5, c + 8) = -2.0;
  }
  const double t1 = durations_(m_ - 1);
  const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
  const int r = 6 * m_ - 3;
  const int c = 6 * (m_ - 1);
  a(r, c) = 1.0;
  a(r, c + 1) = t1;
  a(r, c + 2) = t2;
  a(r, c + 3) = t3;
  a(r, c + 4) = t4;
  a(r, c + 5) = t5;
  a(r + 1, c + 1) = 1.0;
  a(r + 1, c + 2) = 2.0 * t1;
  a(r + 1, c + 3) = 3.0 * t2;
  a(r + 1, c + 4) = 4.0 * t3;
  a(r + 1, c + 5) = 5.0 * t4;
  a(r + 2, c + 2) = 2.0;
  a(r + 2, c + 3) = 6.0 * t1;
  a(r + 2, c + 4) = 12.0 * t2;
  a(r + 2, c + 5) = 20.0 * t3;
}

void Minco::Generate(const Eigen::Matrix2Xd& waypoints, double s_final,
                     const Eigen::VectorXd& durations) {
  if (durations.size() != m_ || waypoints.cols() != m_ - 1) {
    throw Error(ErrorCode::kShapeError,
                "expected " + std::to_string(m_) + " durations and " +
                    std::to_string(m_ - 1) + " waypoints");
  }
  for (int i = 0; i < m_; ++i) {
    if (!(durations(i) > 0.0) || !std::isfinite(durations(i))) {
      throw Error(ErrorCode::kInvalidDuration,
                  "segment " + std::to_string(i) + " has non-positive duration");
    }
  }
  durations_ = durations;
  bc_.final_state(0, 1) = s_final;
  Assemble();

  Eigen::MatrixX2d b = Eigen::MatrixX2d::Zero(6 * m_, 2);
  b.topRows<3>() = bc_.initial;
  for (int i = 0; i < m_ - 1; ++i) b.row(6 * i + 5) = waypoints.col(i).transpose();
  b.bottomRows<3>() = bc_.final_state;

  band_lu_ = band_;
  dense_ = !band_lu_.Factorize(kMinPivot);
  if (!dense_) {
    band_lu_.Solve(b);
    coeffs_ = b;
  } else {
    dense_lu_.compute(band_.ToDense());
    const double det = std::abs(dense_lu_.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw Error(ErrorCode::kSolveFailed, "coefficient system is singular");
    }
    coeffs_ = dense_lu_.solve(Eigen::MatrixXd(b));
  }
  if (!coeffs_.allFinite()) {
    for (int i = 0; i < m_; ++i) {
      if (!coeffs_.middleRows<6>(6 * i).allFinite()) {
        throw Error(ErrorCode::kSolveFailed,
                    "non-finite coefficients in segment " + std::to_string(i));
      }
    }
  }
}

double Minco::Energy(const Eigen::Vector2d& weights) const {
  double e = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double t1 = durations_(i);
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    for (int ch = 0; ch < 2; ++ch) {
      const double c3 = coeffs_(6 * i + 3, ch);
      const double c4 = coeffs_(6 * i + 4, ch);
      const double c5 = coeffs_(6 * i + 5, ch);
      e += weights(ch) * (36.0 * c3 * c3 * t1 + 144.0 * c3 * c4 * t2 +
           (192.0 * c4 * c4 + 240.0 * c3 * c5) * t3 + 720.0 * c4 * c5 * t4 +
           720.0 * c5 * c5 * t5);
    }
  }
  return e;
}

void Minco::AddEnergyGradient(const Eigen::Vector2d& weights,
                              Eigen::MatrixX2d* d_coeffs,
                              Eigen::VectorXd* d_durations) const {
  for (int i = 0; i < m_; ++i) {
    const double t1 = durations_(i);
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    for (int ch = 0; ch < 2; ++ch) {
      const double c3 = coeffs_(6 * i + 3, ch);
      const double c4 = coeffs_(6 * i + 4, ch);
      const double c5 = coeffs_(6 * i + 5, ch);
      const double w = weights(ch);
      (*d_coeffs)(6 * i + 3, ch) +=
          w * (72.0 * c3 * t1 + 144.0 * c4 * t2 + 240.0 * c5 * t3);
      (*d_coeffs)(6 * i + 4, ch) +=
          w * (144.0 * c3 * t2 + 384.0 * c4 * t3 + 720.0 * c5 * t4);
      (*d_coeffs)(6 * i + 5, ch) +=
          w * (240.0 * c3 * t3 + 720.0 * c4 * t4 + 1440.0 * c5 * t5);
      // The derivative of the energy in T is the squared jerk at T.
      const double jerk = 6.0 * c3 + 24.0 * c4 * t1 + 60.0 * c5 * t2;
      (*d_durations)(i) += w * jerk * jerk;
    }
  }
}

void Minco::Backprop(const Eigen::MatrixX2d& d_coeffs,
                     const Eigen::VectorXd& d_durations_direct,
                     Eigen::Matrix2Xd* d_waypoints, Eigen::VectorXd* d_durations,
                     double* d_s_final) const {
  if (d_coeffs.rows() != 6 * m_ || d_durations_direct.size() != m_) {
    throw Error(ErrorCode::kShapeError, "gradient shape does not match the system");
  }
  Eigen::MatrixX2d adj = d_coeffs;
  if (!dense_) {
    band_lu_.SolveTransposed(adj);
  } else {
    adj = dense_lu_.transpose().solve(Eigen::MatrixXd(d_coeffs));
  }

  d_waypoints->resize(2, m_ - 1);
  for (int i = 0; i < m_ - 1; ++i) d_waypoints->col(i) = adj.row(6 * i + 5).transpose();
  *d_s_final = adj(6 * m_ - 3, 1);

  // dJ/dT_i = direct - adj^T (dK/dT_i) c. Each row involving T_i evaluates
  // a derivative of segment i at its end, so its T-derivative is the next
  // higher derivative.
  *d_durations = d_durations_direct;
  for (int i = 0; i < m_; ++i) {
    const double t = durations_(i);
    const auto c = coeffs_.middleRows<6>(6 * i);
    Eigen::Matrix<double, 6, 2> d;  // derivatives 1..6 at T, rows 0..5
    d.row(0) = Basis(t, 1) * c;
    d.row(1) = Basis(t, 2) * c;
    d.row(2) = Basis(t, 3) * c;
    d.row(3) = 24.0 * c.row(4) + 120.0 * t * c.row(5);
    d.row(4) = 120.0 * c.row(5);
    d.row(5).setZero();
    double g = 0.0;
    if (i < m_ - 1) {
      const int r = 6 * i + 3;
      g += adj.row(r).dot(d.row(3));      // jerk continuity -> snap
      g += adj.row(r + 1).dot(d.row(4));  // snap continuity -> crackle
      g += adj.row(r + 2).dot(d.row(0));  // waypoint -> velocity
      g += adj.row(r + 3).dot(d.row(0));
      g += adj.row(r + 4).dot(d.row(1));
      g += adj.row(r + 5).dot(d.row(2));
    } else {
      const int r = 6 * m_ - 3;
      g += adj.row(r).dot(d.row(0));
      g += adj.row(r + 1).dot(d.row(1));
      g += adj.row(r + 2).dot(d.row(2));
    }
    (*d_durations)(i) -= g;
  }
}

Eigen::MatrixXd Minco::DenseSystem() const { return band_.ToDense(); }

}  // namespace ddopt
