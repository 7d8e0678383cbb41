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

#ifndef DDOPT_MINCO_HPP_
#define DDOPT_MINCO_HPP_

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "ddopt/ms_trajectory.hpp"

namespace ddopt {

// Boundary states as rows (value, first, second derivative) and columns
// (theta, s). initial(0, 1) must be 0. final_state(0, 1) is the free final
// arc length and is overwritten by Minco::Generate.
struct BoundaryConditions {
  Eigen::Matrix<double, 3, 2> initial = Eigen::Matrix<double, 3, 2>::Zero();
  Eigen::Matrix<double, 3, 2> final_state = Eigen::Matrix<double, 3, 2>::Zero();
};

// Square band matrix with `lower` sub- and `upper` super-diagonals,
// factorized in place by LU without pivoting.
class BandedMatrix {
 public:
  void Resize(int n, int lower, int upper);
  void SetZero();
  int size() const { return n_; }
  double& operator()(int i, int j) {
    return data_[static_cast<std::size_t>((i - j + upper_) * n_ + j)];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>((i - j + upper_) * n_ + j)];
  }
  bool InBand(int i, int j) const { return i - j <= lower_ && j - i <= upper_; }

  // Returns false when a pivot falls below `min_pivot` in magnitude.
  bool Factorize(double min_pivot);
  void Solve(Eigen::MatrixX2d& b) const;
  void SolveTransposed(Eigen::MatrixX2d& b) const;

  Eigen::MatrixXd ToDense() const;

 private:
  int n_ = 0;
  int lower_ = 0;
  int upper_ = 0;
  std::vector<double> data_;
};

// Minimum-jerk mapping from (boundary states, interior waypoints, durations,
// final arc length) to quintic coefficients. Junction i enforces continuity
// of derivatives 0..4 and interpolates waypoint i.
class Minco {
 public:
  static constexpr double kMinPivot = 1e-12;

  void Setup(const BoundaryConditions& bc, int segments);
  int segments() const { return m_; }
  const BoundaryConditions& boundary() const { return bc_; }

  // waypoints: 2 x (M - 1), rows (theta, s). Throws InvalidDuration on
  // non-positive T and SolveFailed when the system is singular.
  void Generate(const Eigen::Matrix2Xd& waypoints, double s_final,
                const Eigen::VectorXd& durations);

  const Eigen::MatrixX2d& coeffs() const { return coeffs_; }
  const Eigen::VectorXd& durations() const { return durations_; }
  bool used_dense_fallback() const { return dense_; }

  // Jerk energy summed over segments, channel c weighted by weights(c), and
  // its partials added to d_coeffs / d_durations.
  double Energy(const Eigen::Vector2d& weights = Eigen::Vector2d::Ones()) const;
  void AddEnergyGradient(const Eigen::Vector2d& weights, Eigen::MatrixX2d* d_coeffs,
                         Eigen::VectorXd* d_durations) const;

  // Maps dJ/dc and the direct dJ/dT onto the sparse parameters.
  void Backprop(const Eigen::MatrixX2d& d_coeffs,
                const Eigen::VectorXd& d_durations_direct,
                Eigen::Matrix2Xd* d_waypoints, Eigen::VectorXd* d_durations,
                double* d_s_final) const;

  // Assembled system matrix, for inspection and tests.
  Eigen::MatrixXd DenseSystem() const;

 private:
  void Assemble();

  BoundaryConditions bc_;
  int m_ = 0;
  Eigen::VectorXd durations_;
  BandedMatrix band_;
  BandedMatrix band_lu_;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
  bool dense_ = false;
  Eigen::MatrixX2d coeffs_;
};

}  // namespace ddopt

#endif  // DDOPT_MINCO_HPP_
