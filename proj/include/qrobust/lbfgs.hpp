#pragma once

// Limited-memory BFGS with backtracking (Armijo) line search and optional
// projection onto a symmetric box.

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/linalg.hpp"

namespace qrobust {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 3000;
  /// Stop when the (projected) gradient's infinity norm falls below this.
  double gradient_tolerance = 1e-9;
  /// Stop as soon as the objective drops below this value.
  double target_value = -std::numeric_limits<double>::infinity();
  /// Stop when an accepted step decreases f by less than this (relative).
  double value_tolerance = 1e-15;
  double armijo = 1e-4;
  int max_backtracks = 50;
  /// Optional |x_i| <= bound constraint enforced by projection.
  std::optional<double> box;
  /// Called with (iteration, value) after every accepted step.
  std::function<void(int, double)> on_accept;
};

enum class LbfgsStatus { TargetReached, GradientConverged, Stalled, LineSearchFailed, MaxIterations };

inline std::string_view to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::TargetReached: return "target-reached";
    case LbfgsStatus::GradientConverged: return "gradient-converged";
    case LbfgsStatus::Stalled: return "stalled";
    case LbfgsStatus::LineSearchFailed: return "line-search-failed";
    case LbfgsStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

struct LbfgsResult {
  RealVector x;
  double value = 0.0;
  RealVector gradient;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

/// f(x) with the gradient written into the second argument.
using Objective = std::function<double(const RealVector&, RealVector&)>;

inline LbfgsResult lbfgs_minimize(const Objective& objective, RealVector x0,
                                  const LbfgsOptions& opt = {}) {
  const auto project = [&](RealVector& x) {
    if (opt.box) x = x.cwiseMax(-*opt.box).cwiseMin(*opt.box);
  };
  // Gradient components that would push a pinned coordinate out of the box do not count.
  const auto projected_gradient_norm = [&](const RealVector& x, const RealVector& g) {
    if (!opt.box) return g.lpNorm<Eigen::Infinity>();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const bool at_upper = x(i) >= *opt.box && g(i) < 0.0;
      const bool at_lower = x(i) <= -*opt.box && g(i) > 0.0;
      if (!at_upper && !at_lower) worst = std::max(worst, std::abs(g(i)));
    }
    return worst;
  };

  LbfgsResult r;
  r.x = std::move(x0);
  project(r.x);
  r.gradient.resize(r.x.size());
  r.value = objective(r.x, r.gradient);
  r.evaluations = 1;
  if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
    throw NumericalError("objective is not finite at the starting point");
  }

  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  RealVector g_new(r.x.size());

  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    if (r.value < opt.target_value) {
      r.status = LbfgsStatus::TargetReached;
      return r;
    }
    if (projected_gradient_norm(r.x, r.gradient) <= opt.gradient_tolerance) {
      r.status = LbfgsStatus::GradientConverged;
      return r;
    }

    // Two-loop recursion for p = -H g.
    RealVector q = r.gradient;
    std::vector<double> a(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, r.gradient.norm());
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a[i] - b) * s_hist[i];
    }
    RealVector p = -q;
    if (p.dot(r.gradient) >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      p = -r.gradient / std::max(1.0, r.gradient.norm());
    }

    double t = 1.0;
    bool accepted = false;
    RealVector x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < opt.max_backtracks; ++bt, t *= 0.5) {
      x_new = r.x + t * p;
      project(x_new);
      f_new = objective(x_new, g_new);
      ++r.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= r.value + opt.armijo * r.gradient.dot(x_new - r.x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.status = LbfgsStatus::LineSearchFailed;
      return r;
    }

    const double decrease = r.value - f_new;
    RealVector s = x_new - r.x;
    RealVector y = g_new - r.gradient;
    r.x = std::move(x_new);
    r.value = f_new;
    r.gradient = g_new;
    if (opt.on_accept) opt.on_accept(r.iterations + 1, r.value);

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (decrease <= opt.value_tolerance * std::max(1.0, std::abs(r.value))) {
      ++r.iterations;
      r.status = r.value < opt.target_value ? LbfgsStatus::TargetReached : LbfgsStatus::Stalled;
      return r;
    }
  }
  r.status = r.value < opt.target_value ? LbfgsStatus::TargetReached : LbfgsStatus::MaxIterations;
  return r;
}

}  // namespace qrobust
