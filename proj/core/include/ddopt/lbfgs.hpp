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

#ifndef DDOPT_LBFGS_HPP_
#define DDOPT_LBFGS_HPP_

#include <functional>
#include <string_view>

#include <Eigen/Core>

namespace ddopt {

enum class LbfgsStatus {
  kConverged,       // gradient infinity-norm below g_tol
  kStalled,         // relative decrease over `past` iterations below f_tol
  kMaxIterations,
  kLineSearchFail,  // best point returned
  kNonFinite,       // objective not finite at x0
};

std::string_view ToString(LbfgsStatus s);

struct LbfgsParams {
  int memory = 16;
  double g_tol = 1e-5;
  double f_tol = 1e-7;
  int past = 3;
  int max_iterations = 300;
  int max_linesearch = 40;
  double c1 = 1e-4;
  double c2 = 0.9;
};

// Returns f(x) and writes the gradient into *grad (already sized).
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
// Called after every accepted iteration with (iteration, f, gradient).
using IterationFn = std::function<void(int, double, const Eigen::VectorXd&)>;

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
  int iterations = 0;
  int evaluations = 0;
};

// Limited-memory BFGS with a strong-Wolfe line search (bracketing plus
// cubic-interpolation zoom). The returned point is the best one evaluated.
LbfgsResult LbfgsMinimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                          const LbfgsParams& params = {},
                          const IterationFn& on_iteration = {});

}  // namespace ddopt

#endif  // DDOPT_LBFGS_HPP_
