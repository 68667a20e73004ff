#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "elasmatch/core/error.hpp"
#include "elasmatch/optimize/line_search.hpp"

namespace elasmatch {

enum class Termination { GradientTolerance, StepTolerance, MaxIterations, LineSearchFailure };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient-tolerance";
    case Termination::StepTolerance: return "step-tolerance";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::LineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

struct LbfgsSettings {
  /// Number of stored correction pairs; 0 gives steepest descent.
  int memory = 10;
  /// Stop when |g| <= gradient_tolerance * |g0|.
  double gradient_tolerance = 1e-8;
  /// Stop when |x_{k+1} - x_k| <= step_tolerance * max(1, |x_k|).
  double step_tolerance = 1e-12;
  int max_iterations = 1000;
  LineSearchSettings line_search;

  friend bool operator==(const LbfgsSettings& a, const LbfgsSettings& b) {
    return a.memory == b.memory && a.gradient_tolerance == b.gradient_tolerance &&
           a.step_tolerance == b.step_tolerance && a.max_iterations == b.max_iterations &&
           a.line_search.c1 == b.line_search.c1 && a.line_search.c2 == b.line_search.c2 &&
           a.line_search.max_evaluations == b.line_search.max_evaluations;
  }
};

struct OptimProblem {
  Objective objective;
  Eigen::VectorXd initial;
};

struct OptimReport {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  Termination reason = Termination::MaxIterations;
  /// Objective value at the initial point and after every accepted step.
  std::vector<double> trace;
};

/// Called after every accepted iterate with (iteration, x, value).
using IterateCallback = std::function<void(int, const Eigen::VectorXd&, double)>;

/// Limited-memory BFGS (two-loop recursion, scaled identity as initial
/// inverse Hessian) with a strong-Wolfe line search. The first step is scaled
/// by 1/|g0|; later steps start at 1.
inline OptimReport lbfgs_minimize(const OptimProblem& problem, const LbfgsSettings& settings = {},
                                  const IterateCallback& on_iterate = {}) {
  if (settings.memory < 0 || settings.max_iterations < 0) {
    throw Error(ErrorKind::InvalidArgument, "L-BFGS memory and iteration limits must be non-negative");
  }
  OptimReport report;
  Eigen::VectorXd x = problem.initial;
  Eigen::VectorXd g(x.size());
  double f = problem.objective(x, g);
  report.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw Error(ErrorKind::NonFiniteValue, "objective is not finite at the initial point");
  }
  report.trace.push_back(f);
  if (on_iterate) on_iterate(0, x, f);

  const double g0_norm = g.norm();
  const double g_target = settings.gradient_tolerance * g0_norm;
  auto finish = [&](Termination reason) {
    report.x = x;
    report.value = f;
    report.gradient_norm = g.norm();
    report.reason = reason;
    return report;
  };
  if (g0_norm <= g_target) return finish(Termination::GradientTolerance);

  struct Correction {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Correction> history;
  std::vector<double> alpha;

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    // Two-loop recursion: direction = -H g.
    Eigen::VectorXd d = -g;
    alpha.assign(history.size(), 0.0);
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * history[k].s.dot(d);
      d -= alpha[k] * history[k].y;
    }
    if (!history.empty()) {
      const auto& last = history.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * history[k].y.dot(d);
      d += (alpha[k] - beta) * history[k].s;
    }
    if (!(g.dot(d) < 0.0)) {
      history.clear();
      d = -g;
    }

    const double initial_step = iter == 1 ? 1.0 / g.norm() : 1.0;
    LineSearchResult ls = strong_wolfe_search(problem.objective, x, f, g, d, initial_step, settings.line_search);
    report.evaluations += ls.evaluations;
    if (!ls.success && !history.empty()) {
      // Retry once along steepest descent with a fresh model.
      history.clear();
      d = -g;
      ls = strong_wolfe_search(problem.objective, x, f, g, d, 1.0 / g.norm(), settings.line_search);
      report.evaluations += ls.evaluations;
    }
    if (!ls.success) return finish(Termination::LineSearchFailure);

    Eigen::VectorXd s = ls.x - x;
    Eigen::VectorXd y = ls.grad - g;
    const double x_norm = x.norm();
    x = std::move(ls.x);
    g = std::move(ls.grad);
    f = ls.value;
    report.iterations = iter;
    report.trace.push_back(f);
    if (on_iterate) on_iterate(iter, x, f);

    if (g.norm() <= g_target) return finish(Termination::GradientTolerance);
    if (s.norm() <= settings.step_tolerance * std::max(1.0, x_norm)) {
      return finish(Termination::StepTolerance);
    }

    const double sy = s.dot(y);
    if (settings.memory > 0 && sy > std::numeric_limits<double>::epsilon() * y.squaredNorm()) {
      if (history.size() == static_cast<std::size_t>(settings.memory)) history.pop_front();
      history.push_back({std::move(s), std::move(y), 1.0 / sy});
    }
  }
  return finish(Termination::MaxIterations);
}

}  // namespace elasmatch
