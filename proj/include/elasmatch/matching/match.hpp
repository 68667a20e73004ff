#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elasmatch/matching/config.hpp"
#include "elasmatch/matching/energy.hpp"

namespace elasmatch {

/// One minimization at fixed kernel scale and lambda.
struct StageRecord {
  std::size_t scale_index = 0;
  int lambda_stage = 0;
  double sigma = 0.0;
  double lambda = 0.0;
  /// <mu_f1, mu_f1> under this stage's kernel.
  double target_self = 0.0;
  EnergyTerms final_terms;
  /// sqrt(varifold term) at the end of the stage, under the stage kernel.
  double residual = 0.0;
  double tolerance = 0.0;
  /// Residual under the finest kernel of the schedule, comparable across
  /// stages.
  double reference_residual = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  Termination reason = Termination::MaxIterations;
  bool aborted = false;
  std::string abort_message;
  /// Energy terms at the start point and after every accepted iterate.
  std::vector<EnergyTerms> trace;
};

template <DiscreteShape S>
struct MatchResult {
  S shape;
  std::vector<StageRecord> stages;
  /// sqrt(var_dist_sq(f, f1)) under the finest kernel.
  double final_residual = 0.0;
  double final_tolerance = 0.0;
  /// <mu_f1, mu_f1> under the finest kernel.
  double reference_self = 0.0;
  /// sqrt(srnf_dist_sq(f0, f)).
  double srnf_distance = 0.0;
  bool converged = false;
  bool aborted = false;
};

namespace detail {

template <DiscreteShape S>
double residual_at(const S& structure, const PointList<S::kDim>& x, const VarifoldAtoms<S::kDim>& target,
                   double target_self, const KernelConfig& kernel, int threads) {
  PointList<S::kDim> scratch(x.size());
  const auto d = var_dist_sq_with_grad(target, target_self, structure, std::span<const Point<S::kDim>>(x),
                                       std::span<Point<S::kDim>>(scratch), kernel, threads);
  return std::sqrt(d.value);
}

}  // namespace detail

/// Deforms the template f0 towards a target made of one or more parts by
/// minimizing the relaxed energy over f0's vertex positions. The target may
/// differ from f0 in sampling and topology; it enters only through the union
/// of its parts' atoms. Stages run coarse to fine over the kernel scales; a
/// scale whose starting residual already meets its tolerance is skipped
/// (except the very first stage). Stops early once the finest-scale residual
/// meets its tolerance.
template <DiscreteShape S>
MatchResult<S> match(const S& f0, std::span<const S> target_parts, const MatchConfig& config,
                     const std::optional<PointList<S::kDim>>& initial = std::nullopt) {
  constexpr int D = S::kDim;
  if (target_parts.empty()) throw Error(ErrorKind::InvalidArgument, "match needs a target");
  config.validate();
  config.kernel.validate();
  if (config.init == InitMode::Custom && !initial) {
    throw Error(ErrorKind::ConfigError, "custom initialization requested without initial vertices");
  }
  PointList<D> x = (config.init == InitMode::Custom) ? *initial : f0.vertices();
  if (x.size() != f0.vertex_count()) {
    throw Error(ErrorKind::StructureMismatch, "initial vertices do not match the template");
  }

  std::vector<VarifoldAtoms<D>> part_atoms;
  PointList<D> all_vertices;
  for (const S& part : target_parts) {
    part_atoms.push_back(atoms(part));
    all_vertices.insert(all_vertices.end(), part.vertices().begin(), part.vertices().end());
  }
  const VarifoldAtoms<D> target = merge_atoms<D>(part_atoms);
  const double diag = principal_box_diagonal<D>(all_vertices);

  auto kernel_at = [&](std::size_t level) {
    KernelConfig k = config.kernel;
    k.sigma = config.sigma_schedule[level] * diag;
    return k;
  };
  const std::size_t levels = config.sigma_schedule.size();
  const KernelConfig finest = kernel_at(levels - 1);
  const double finest_self = var_inner(target, target, finest, config.threads);
  if (!(finest_self > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "target varifold has zero norm under the finest kernel");
  }
  const double finest_tol = config.residual_tolerance * std::sqrt(finest_self);
  auto finest_residual = [&](const PointList<D>& v) {
    return detail::residual_at(f0, v, target, finest_self, finest, config.threads);
  };

  MatchResult<S> result{f0, {}, 0.0, finest_tol, finest_self, 0.0, false, false};
  // lambda is tracked through the dimensionless product lambda * <mu_f1, mu_f1>
  // so that it carries over between kernel scales.
  double balance = 1.0;
  if (config.lambda0) balance = *config.lambda0 * var_inner(target, target, kernel_at(0), config.threads);
  bool done = false;
  for (std::size_t level = 0; level < levels && !done; ++level) {
    const KernelConfig kernel = kernel_at(level);
    const double self = var_inner(target, target, kernel, config.threads);
    if (!(self > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "target varifold has zero norm at kernel scale " +
                                                  std::to_string(kernel.sigma));
    }
    const double tol = config.residual_tolerance * std::sqrt(self);
    if (level > 0 && detail::residual_at(f0, x, target, self, kernel, config.threads) <= tol) continue;

    for (int stage = 0; stage < config.max_stages; ++stage) {
      const double lambda = balance / self;
      const MatchingEnergy<S> energy_fn(f0, target, kernel, lambda, config.threads);
      StageRecord rec;
      rec.scale_index = level;
      rec.lambda_stage = stage;
      rec.sigma = kernel.sigma;
      rec.lambda = lambda;
      rec.target_self = self;
      rec.tolerance = tol;

      // The optimizer reports accepted points; the per-term split comes from
      // the last evaluation when it matches, otherwise it is recomputed.
      Eigen::VectorXd last_x;
      EnergyTerms last_terms;
      const Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        EnergyTerms t;
        const double value = energy_fn(v, g, &t);
        last_x = v;
        last_terms = t;
        return value;
      };
      auto on_iterate = [&](int, const Eigen::VectorXd& v, double) {
        if (last_x.size() != v.size() || last_x != v) {
          Eigen::VectorXd g(v.size());
          energy_fn(v, g, &last_terms);
          last_x = v;
        }
        rec.trace.push_back(last_terms);
      };

      try {
        const OptimReport rep = lbfgs_minimize({objective, flatten<D>(x)}, config.optimizer, on_iterate);
        x = unflatten<D>(rep.x);
        rec.iterations = rep.iterations;
        rec.evaluations = rep.evaluations;
        rec.gradient_norm = rep.gradient_norm;
        rec.reason = rep.reason;
        rec.final_terms = rec.trace.back();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFiniteValue) throw;
        rec.aborted = true;
        rec.abort_message = e.what();
        result.aborted = true;
      }

      if (!rec.aborted) {
        rec.residual = std::sqrt(rec.final_terms.varifold);
        rec.reference_residual = level + 1 == levels ? rec.residual : finest_residual(x);
      }
      result.stages.push_back(std::move(rec));
      const StageRecord& last = result.stages.back();
      if (last.aborted) {
        done = true;
        break;
      }
      if (last.reference_residual <= finest_tol) {
        done = true;
        break;
      }
      if (last.residual <= tol) break;
      if (stage + 1 < config.max_stages) balance *= config.rho;
    }
  }

  result.shape = f0.with_vertices(x);
  result.final_residual = finest_residual(x);
  result.srnf_distance = std::sqrt(srnf_dist_sq(f0, result.shape));
  result.converged = !result.aborted && result.final_residual <= finest_tol;
  return result;
}

template <DiscreteShape S>
MatchResult<S> match(const S& f0, const S& f1, const MatchConfig& config,
                     const std::optional<PointList<S::kDim>>& initial = std::nullopt) {
  return match(f0, std::span<const S>(&f1, 1), config, initial);
}

template <DiscreteShape S>
struct DistanceResult {
  double distance = 0.0;
  MatchResult<S> match;
};

/// Elastic distance between the unparametrized shapes [f0] and [f1],
/// measured as the SRNF distance from f0 to its optimal deformation onto f1.
/// Not symmetric in its arguments.
template <DiscreteShape S>
DistanceResult<S> unparametrized_distance(const S& f0, const S& f1, const MatchConfig& config) {
  MatchResult<S> m = match(f0, f1, config);
  const double d = m.srnf_distance;
  return {d, std::move(m)};
}

}  // namespace elasmatch
