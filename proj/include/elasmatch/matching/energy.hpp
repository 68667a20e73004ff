#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "elasmatch/srnf/srnf.hpp"
#include "elasmatch/varifold/distance.hpp"

namespace elasmatch {

struct EnergyTerms {
  double srnf = 0.0;
  double varifold = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

/// The relaxed matching energy
///   E(f) = |q_{f0} - q_f|^2 + lambda * ||mu_f - mu_{f1}||^2
/// as a function of the vertex positions of f, which shares f0's cells. The
/// target enters only through its fixed atoms.
template <DiscreteShape S>
class MatchingEnergy {
 public:
  static constexpr int D = S::kDim;

  MatchingEnergy(const S& f0, VarifoldAtoms<D> target, KernelConfig kernel, double lambda, int threads = 1)
      : f0_(f0),
        q0_(srnf(f0)),
        target_(std::move(target)),
        kernel_(std::move(kernel)),
        lambda_(lambda),
        threads_(threads) {
    kernel_.validate();
    target_self_ = var_inner(target_, target_, kernel_, threads_);
  }

  const S& structure() const noexcept { return f0_; }
  const KernelConfig& kernel() const noexcept { return kernel_; }
  double lambda() const noexcept { return lambda_; }
  double target_self() const noexcept { return target_self_; }
  const VarifoldAtoms<D>& target() const noexcept { return target_; }

  /// Energy and gradient at `vertices`. Throws DegenerateCellError when a
  /// cell collapses.
  EnergyTerms evaluate(std::span<const Point<D>> vertices, std::span<Point<D>> grad) const {
    PointList<D> var_grad(vertices.size());
    EnergyTerms t;
    t.lambda = lambda_;
    t.srnf = srnf_dist_sq_with_grad(f0_, q0_, vertices, grad);
    t.varifold = var_dist_sq_with_grad(target_, target_self_, f0_, vertices,
                                       std::span<Point<D>>(var_grad), kernel_, threads_)
                     .value;
    t.total = t.srnf + lambda_ * t.varifold;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += lambda_ * var_grad[i];
    return t;
  }

  /// Flattened-coordinate objective for the optimizer. Collapsed cells give
  /// +inf so line searches back off instead of failing.
  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad, EnergyTerms* terms = nullptr) const {
    const PointList<D> v = unflatten<D>(x);
    PointList<D> g(v.size());
    try {
      const EnergyTerms t = evaluate(v, g);
      if (terms) *terms = t;
      grad = flatten<D>(g);
      return t.total;
    } catch (const DegenerateCellError&) {
      grad.setZero();
      return std::numeric_limits<double>::infinity();
    }
  }

 private:
  S f0_;
  SrnfField<D> q0_;
  VarifoldAtoms<D> target_;
  KernelConfig kernel_;
  double lambda_;
  int threads_;
  double target_self_ = 0.0;
};

/// Value and vertex gradient of the relaxed energy at f.
template <DiscreteShape S>
std::pair<double, PointList<S::kDim>> energy(const S& f0, const S& f, const VarifoldAtoms<S::kDim>& f1_atoms,
                                             double lambda, const KernelConfig& kernel, int threads = 1) {
  if (!f0.same_structure(f)) {
    throw Error(ErrorKind::StructureMismatch, "f must share the template's cell structure");
  }
  const MatchingEnergy<S> e(f0, f1_atoms, kernel, lambda, threads);
  PointList<S::kDim> grad(f.vertex_count());
  const EnergyTerms t = e.evaluate(f.vertices(), grad);
  return {t.total, std::move(grad)};
}

}  // namespace elasmatch
