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

#include "ddopt/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ddopt {

std::string_view ToString(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::kConverged: return "converged";
    case LbfgsStatus::kStalled: return "stalled";
    case LbfgsStatus::kMaxIterations: return "max_iterations";
    case LbfgsStatus::kLineSearchFail: return "line_search_fail";
    case LbfgsStatus::kNonFinite: return "non_finite";
  }
  return "unknown";
}

namespace {

// Minimizer of the cubic through (a, fa, da) and (b, fb, db); NaN when the
// cubic has no real minimizer.
double CubicMin(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& f, const LbfgsParams& p, LbfgsResult* best,
             Eigen::VectorXd* best_g)
      : f_(f), p_(p), best_(best), best_g_(best_g) {}

  // Searches along d from x (f0, dphi0 < 0). On success fills x_new, f_new,
  // g_new and returns true.
  bool Run(const Eigen::VectorXd& x, double f0, double dphi0, const Eigen::VectorXd& d,
           double alpha, Eigen::VectorXd* x_new, double* f_new, Eigen::VectorXd* g_new) {
    x_ = &x;
    d_ = &d;
    f0_ = f0;
    dphi0_ = dphi0;
    x_new_ = x_new;
    f_new_ = f_new;
    g_new_ = g_new;
    evals_ = 0;

    double a_prev = 0.0, f_prev = f0, dphi_prev = dphi0;
    for (int it = 0; it < p_.max_linesearch; ++it) {
      double fa = 0.0, da = 0.0;
      Eval(alpha, &fa, &da);
      if (!std::isfinite(fa) || !std::isfinite(da)) {
        // Treat as overshooting: shrink towards the last good step.
        if (evals_ >= p_.max_linesearch) return false;
        alpha = a_prev + 0.5 * (alpha - a_prev);
        continue;
      }
      if (fa > f0 + p_.c1 * alpha * dphi0 || (it > 0 && fa >= f_prev)) {
        return Zoom(a_prev, f_prev, dphi_prev, alpha, fa, da);
      }
      if (std::abs(da) <= -p_.c2 * dphi0) return Commit(fa);
      if (da >= 0.0) return Zoom(alpha, fa, da, a_prev, f_prev, dphi_prev);
      a_prev = alpha;
      f_prev = fa;
      dphi_prev = da;
      alpha *= 2.0;
      if (evals_ >= p_.max_linesearch) return false;
    }
    return false;
  }

  int evaluations() const { return evals_; }

 private:
  void Eval(double alpha, double* fa, double* da) {
    ++evals_;
    ++best_->evaluations;
    xt_ = *x_ + alpha * *d_;
    gt_.resize(xt_.size());
    *fa = f_(xt_, &gt_);
    *da = gt_.dot(*d_);
    if (std::isfinite(*fa) && gt_.allFinite() && *fa < best_->f) {
      best_->f = *fa;
      best_->x = xt_;
      *best_g_ = gt_;
    }
  }

  bool Zoom(double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi) {
    while (evals_ < p_.max_linesearch) {
      const double width = hi - lo;
      if (std::abs(width) < 1e-16 * std::max(1.0, std::abs(lo))) return false;
      double a = CubicMin(lo, f_lo, d_lo, hi, f_hi, d_hi);
      const double lo_b = std::min(lo, hi) + 0.1 * std::abs(width);
      const double hi_b = std::max(lo, hi) - 0.1 * std::abs(width);
      if (!std::isfinite(a) || a < lo_b || a > hi_b) a = 0.5 * (lo + hi);
      double fa = 0.0, da = 0.0;
      Eval(a, &fa, &da);
      if (!std::isfinite(fa) || !std::isfinite(da)) {
        hi = a;
        f_hi = std::numeric_limits<double>::infinity();
        d_hi = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (fa > f0_ + p_.c1 * a * dphi0_ || fa >= f_lo) {
        hi = a;
        f_hi = fa;
        d_hi = da;
      } else {
        if (std::abs(da) <= -p_.c2 * dphi0_) return Commit(fa);
        if (da * (hi - lo) >= 0.0) {
          hi = lo;
          f_hi = f_lo;
          d_hi = d_lo;
        }
        lo = a;
        f_lo = fa;
        d_lo = da;
      }
    }
    // Out of evaluations: accept the best sufficient-decrease point if any.
    if (lo > 0.0) {
      double fa, da;
      Eval(lo, &fa, &da);
      return Commit(fa);
    }
    return false;
  }

  bool Commit(double fa) {
    *x_new_ = xt_;
    *g_new_ = gt_;
    *f_new_ = fa;
    return true;
  }

  const ObjectiveFn& f_;
  const LbfgsParams& p_;
  LbfgsResult* best_;
  Eigen::VectorXd* best_g_;
  const Eigen::VectorXd* x_ = nullptr;
  const Eigen::VectorXd* d_ = nullptr;
  double f0_ = 0.0;
  double dphi0_ = 0.0;
  Eigen::VectorXd* x_new_ = nullptr;
  double* f_new_ = nullptr;
  Eigen::VectorXd* g_new_ = nullptr;
  Eigen::VectorXd xt_;
  Eigen::VectorXd gt_;
  int evals_ = 0;
};

}  // namespace

LbfgsResult LbfgsMinimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                          const LbfgsParams& params, const IterationFn& on_iteration) {
  LbfgsResult best;
  best.x = x0;
  Eigen::VectorXd g(x0.size());
  double fx = f(x0, &g);
  best.evaluations = 1;
  best.f = fx;
  if (!std::isfinite(fx) || !g.allFinite()) {
    best.status = LbfgsStatus::kNonFinite;
    return best;
  }
  Eigen::VectorXd best_g = g;
  if (g.lpNorm<Eigen::Infinity>() < params.g_tol) {
    best.status = LbfgsStatus::kConverged;
    return best;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> f_hist{fx};
  Eigen::VectorXd x = x0;
  Eigen::VectorXd d(x0.size()), x_new(x0.size()), g_new(x0.size());
  std::vector<double> alpha_buf;
  LineSearch ls(f, params, &best, &best_g);
  bool reset_tried = false;

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    // Two-loop recursion.
    d = -g;
    const int k = static_cast<int>(s_hist.size());
    alpha_buf.assign(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      alpha_buf[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha_buf[i] * y_hist[i];
    }
    if (k > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha_buf[i] - beta) * s_hist[i];
    }
    double dphi0 = g.dot(d);
    if (!(dphi0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }
    const double step0 = k == 0 ? std::min(1.0, 1.0 / d.norm()) : 1.0;

    double f_new = 0.0;
    if (!ls.Run(x, fx, dphi0, d, step0, &x_new, &f_new, &g_new)) {
      if (!reset_tried && !s_hist.empty()) {
        reset_tried = true;
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        --iter;
        continue;
      }
      best.status = LbfgsStatus::kLineSearchFail;
      best.iterations = iter;
      return best;
    }
    reset_tried = false;

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    x = x_new;
    g = g_new;
    fx = f_new;
    best.iterations = iter;
    if (on_iteration) on_iteration(iter, fx, g);

    const double sy = s.dot(y);
    if (sy > 1e-16 * y.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == params.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    if (g.lpNorm<Eigen::Infinity>() < params.g_tol) {
      best.status = LbfgsStatus::kConverged;
      return best;
    }
    f_hist.push_back(fx);
    if (static_cast<int>(f_hist.size()) > params.past) {
      const double old = f_hist.front();
      f_hist.pop_front();
      if ((old - fx) <= params.f_tol * std::max(1.0, std::abs(fx))) {
        best.status = LbfgsStatus::kStalled;
        return best;
      }
    }
  }
  best.status = LbfgsStatus::kMaxIterations;
  return best;
}

}  // namespace ddopt
