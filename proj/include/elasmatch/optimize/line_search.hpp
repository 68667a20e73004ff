#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Core>

namespace elasmatch {

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized). Non-finite values mark points the line search must avoid.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LineSearchSettings {
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_evaluations = 40;
  double max_step = 1e20;
};

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  double value = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
  int evaluations = 0;
};

namespace detail {

/// Minimizer of the cubic matching values and slopes at a and b, or NaN.
inline double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

}  // namespace detail

/// Line search along `direction` enforcing the strong Wolfe conditions
/// f(x + a p) <= f(x) + c1 a f'(0) and |f'(a)| <= c2 |f'(0)|. Bracketing by
/// doubling, then zooming with safeguarded cubic interpolation. If the
/// evaluation budget runs out, the lowest sufficient-decrease point seen is
/// returned as a (curvature-failing) success when it improves on f0.
inline LineSearchResult strong_wolfe_search(const Objective& objective, const Eigen::VectorXd& x0,
                                            double f0, const Eigen::VectorXd& g0,
                                            const Eigen::VectorXd& direction, double initial_step,
                                            const LineSearchSettings& settings) {
  const double d0 = g0.dot(direction);
  LineSearchResult out;
  out.value = f0;
  if (!(d0 < 0.0)) return out;

  struct Sample {
    double step, value, slope;
    Eigen::VectorXd x, grad;
  };
  auto evaluate = [&](double step) {
    Sample s{step, 0.0, 0.0, x0 + step * direction, Eigen::VectorXd(x0.size())};
    s.value = objective(s.x, s.grad);
    if (!s.grad.allFinite()) s.value = std::numeric_limits<double>::infinity();
    ++out.evaluations;
    s.slope = std::isfinite(s.value) ? s.grad.dot(direction) : std::numeric_limits<double>::quiet_NaN();
    return s;
  };
  auto accept = [&](Sample&& s) {
    out.success = true;
    out.step = s.step;
    out.value = s.value;
    out.x = std::move(s.x);
    out.grad = std::move(s.grad);
    return out;
  };
  auto sufficient = [&](const Sample& s) { return s.value <= f0 + settings.c1 * s.step * d0; };
  auto curvature = [&](const Sample& s) { return std::abs(s.slope) <= -settings.c2 * d0; };

  Sample lo{0.0, f0, d0, x0, g0};
  std::optional<Sample> best;  // lowest point satisfying sufficient decrease
  auto remember = [&](const Sample& s) {
    if (std::isfinite(s.value) && sufficient(s) && (!best || s.value < best->value)) best = s;
  };
  auto fallback = [&]() {
    if (best && best->value < f0) return accept(std::move(*best));
    return out;
  };

  // Zoom on an interval [lo, hi] known to contain acceptable steps.
  auto zoom = [&](Sample lo_s, Sample hi_s) -> LineSearchResult {
    while (out.evaluations < settings.max_evaluations) {
      const double a = lo_s.step, b = hi_s.step;
      const double width = std::abs(b - a);
      if (width <= std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) break;
      double trial = std::isfinite(hi_s.value)
                         ? detail::cubic_minimizer(a, lo_s.value, lo_s.slope, b, hi_s.value, hi_s.slope)
                         : std::numeric_limits<double>::quiet_NaN();
      const double lo_edge = std::min(a, b) + 0.1 * width;
      const double hi_edge = std::max(a, b) - 0.1 * width;
      if (!std::isfinite(trial) || trial < lo_edge || trial > hi_edge) trial = 0.5 * (a + b);
      Sample s = evaluate(trial);
      remember(s);
      if (!std::isfinite(s.value) || !sufficient(s) || s.value >= lo_s.value) {
        hi_s = std::move(s);
        continue;
      }
      if (curvature(s)) return accept(std::move(s));
      if (s.slope * (hi_s.step - lo_s.step) >= 0.0) hi_s = lo_s;
      lo_s = std::move(s);
    }
    return fallback();
  };

  Sample prev = lo;
  double step = std::min(initial_step, settings.max_step);
  for (int i = 0; out.evaluations < settings.max_evaluations; ++i) {
    Sample s = evaluate(step);
    remember(s);
    if (!std::isfinite(s.value)) {
      // Overshot into an invalid region: the interval (prev, step) is a bracket
      // whose upper end must be approached from below.
      return zoom(std::move(prev), std::move(s));
    }
    if (!sufficient(s) || (i > 0 && s.value >= prev.value)) return zoom(std::move(prev), std::move(s));
    if (curvature(s)) return accept(std::move(s));
    if (s.slope >= 0.0) return zoom(std::move(s), std::move(prev));
    if (step >= settings.max_step) break;
    prev = std::move(s);
    step = std::min(2.0 * step, settings.max_step);
  }
  return fallback();
}

}  // namespace elasmatch
