#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "elasmatch/core/parallel.hpp"
#include "elasmatch/core/summation.hpp"
#include "elasmatch/varifold/atoms.hpp"
#include "elasmatch/varifold/kernel.hpp"

namespace elasmatch {

/// Rows per parallel work item. Each row is reduced serially inside its
/// tile and rows are combined in index order, so results do not depend on
/// the thread count.
inline constexpr std::size_t kVarifoldTileRows = 32;

/// Squared varifold distance with the raw (unclamped) value.
struct VarifoldDistance {
  double value = 0.0;
  double raw = 0.0;
  /// Raw value was below -1e-10 * <mu_a, mu_a>: more than round-off.
  bool suspicious_negative = false;
};

namespace detail {

template <int D>
void check_compatible(const VarifoldAtoms<D>& a, const VarifoldAtoms<D>& b, const KernelConfig& kernel) {
  kernel.validate();
  if (kernel.signal_scale && (!a.signal || !b.signal)) {
    throw Error(ErrorKind::SignalMismatch, "signal kernel configured but a shape carries no signal");
  }
}

/// Kernel-weighted pair term w_i w_j k_pos k_dir k_sig between atom i of a and
/// atom j of b. Optionally returns the pieces needed for gradients.
template <int D>
struct PairEvaluator {
  const KernelConfig& kernel;
  double inv_sigma2;
  double inv_tau2;

  explicit PairEvaluator(const KernelConfig& k)
      : kernel(k),
        inv_sigma2(1.0 / (k.sigma * k.sigma)),
        inv_tau2(k.signal_scale ? 1.0 / (*k.signal_scale * *k.signal_scale) : 0.0) {}

  double direction(double cos_angle) const {
    return kernel.direction == DirectionKernel::Linear ? cos_angle : cos_angle * cos_angle;
  }

  double signal(const VarifoldAtoms<D>& a, std::size_t i, const VarifoldAtoms<D>& b, std::size_t j) const {
    return kernel.signal_scale ? signal_kernel((*a.signal)[i], (*b.signal)[j], inv_tau2) : 1.0;
  }

  double value(const VarifoldAtoms<D>& a, std::size_t i, const VarifoldAtoms<D>& b, std::size_t j) const {
    const double r2 = (a.centers[i] - b.centers[j]).squaredNorm();
    const double kp = position_kernel(kernel.position, r2, inv_sigma2).value;
    const double kd = direction(a.normals[i].dot(b.normals[j]));
    return a.weights[i] * b.weights[j] * kp * kd * signal(a, i, b, j);
  }
};

/// Row sums sum_j pair(a_i, b_j), computed in tiles.
template <int D>
std::vector<double> inner_rows(const VarifoldAtoms<D>& a, const VarifoldAtoms<D>& b,
                               const KernelConfig& kernel, int threads) {
  const PairEvaluator<D> pair(kernel);
  std::vector<double> rows(a.size());
  const std::size_t tiles = (a.size() + kVarifoldTileRows - 1) / kVarifoldTileRows;
  parallel_for(tiles, threads, [&](std::size_t tile) {
    const std::size_t end = std::min(a.size(), (tile + 1) * kVarifoldTileRows);
    for (std::size_t i = tile * kVarifoldTileRows; i < end; ++i) {
      CompensatedSum acc;
      for (std::size_t j = 0; j < b.size(); ++j) acc += pair.value(a, i, b, j);
      rows[i] = acc.value();
    }
  });
  return rows;
}

inline VarifoldDistance combine(double aa, double ab, double bb) {
  CompensatedSum acc(aa);
  acc += -2.0 * ab;
  acc += bb;
  const double raw = acc.value();
  return {std::max(raw, 0.0), raw, raw < -1e-10 * std::abs(aa)};
}

}  // namespace detail

/// RKHS inner product <mu_a, mu_b> of two discrete varifolds.
template <int D>
double var_inner(const VarifoldAtoms<D>& a, const VarifoldAtoms<D>& b, const KernelConfig& kernel,
                 int threads = 1) {
  detail::check_compatible(a, b, kernel);
  const std::vector<double> rows = detail::inner_rows(a, b, kernel, threads);
  return compensated_sum(rows);
}

/// ||mu_a - mu_b||^2 in the dual RKHS norm, with diagnostics.
template <int D>
VarifoldDistance var_distance(const VarifoldAtoms<D>& a, const VarifoldAtoms<D>& b,
                              const KernelConfig& kernel, int threads = 1) {
  detail::check_compatible(a, b, kernel);
  return detail::combine(var_inner(a, a, kernel, threads), var_inner(a, b, kernel, threads),
                         var_inner(b, b, kernel, threads));
}

template <int D>
double var_dist_sq(const VarifoldAtoms<D>& a, const VarifoldAtoms<D>& b, const KernelConfig& kernel,
                   int threads = 1) {
  return var_distance(a, b, kernel, threads).value;
}

/// Squared varifold distance between a fixed target and the varifold of
/// `structure` placed at `vertices`, with the gradient with respect to those
/// vertices written into `grad`. `target_self` may carry a precomputed
/// <mu_target, mu_target>; pass NaN to have it computed.
template <DiscreteShape S>
VarifoldDistance var_dist_sq_with_grad(const VarifoldAtoms<S::kDim>& target, double target_self,
                                       const S& structure, std::span<const Point<S::kDim>> vertices,
                                       std::span<Point<S::kDim>> grad, const KernelConfig& kernel,
                                       int threads = 1) {
  constexpr int D = S::kDim;
  if (vertices.size() != structure.vertex_count() || grad.size() != vertices.size()) {
    throw Error(ErrorKind::StructureMismatch, "vertex array does not match the cell structure");
  }
  const VarifoldAtoms<D> moving = atoms(structure, vertices);
  detail::check_compatible(target, moving, kernel);
  if (std::isnan(target_self)) target_self = var_inner(target, target, kernel, threads);

  const detail::PairEvaluator<D> pair(kernel);
  const std::size_t n = moving.size();
  std::vector<double> self_rows(n), cross_rows(n);
  PointList<D> d_center(n), d_area(n);

  // Accumulates sum_j pair(i, j) over `other` plus the partial derivatives of
  // that sum with respect to center i and area vector i (= w_i n_i), scaled
  // by `factor`.
  auto row = [&](std::size_t i, const VarifoldAtoms<D>& other, double factor, Point<D>& dc,
                 Point<D>& du) {
    CompensatedSum acc;
    const Point<D>& xi = moving.centers[i];
    const Point<D>& ni = moving.normals[i];
    const double wi = moving.weights[i];
    for (std::size_t j = 0; j < other.size(); ++j) {
      const Point<D> diff = xi - other.centers[j];
      const auto kp = detail::position_kernel(kernel.position, diff.squaredNorm(), pair.inv_sigma2);
      const double c = ni.dot(other.normals[j]);
      const double ks = pair.signal(moving, i, other, j);
      const double wj = other.weights[j];
      const double kd = pair.direction(c);
      acc += wi * wj * kp.value * kd * ks;
      dc += (factor * 2.0 * kp.d_r2 * wi * wj * kd * ks) * diff;
      // d/du_i of w_i k_dir(n_i, n_j).
      if (kernel.direction == DirectionKernel::Linear) {
        du += (factor * kp.value * ks * wj) * other.normals[j];
      } else {
        du += (factor * kp.value * ks * wj) * (2.0 * c * other.normals[j] - c * c * ni);
      }
    }
    return acc.value();
  };

  const std::size_t tiles = (n + kVarifoldTileRows - 1) / kVarifoldTileRows;
  parallel_for(tiles, threads, [&](std::size_t tile) {
    const std::size_t end = std::min(n, (tile + 1) * kVarifoldTileRows);
    for (std::size_t i = tile * kVarifoldTileRows; i < end; ++i) {
      d_center[i].setZero();
      d_area[i].setZero();
      self_rows[i] = row(i, moving, 2.0, d_center[i], d_area[i]);
      cross_rows[i] = row(i, target, -2.0, d_center[i], d_area[i]);
    }
  });

  for (auto& g : grad) g.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    structure.scatter_gradient(vertices, i, d_area[i], d_center[i], grad);
  }
  return detail::combine(target_self, compensated_sum(cross_rows), compensated_sum(self_rows));
}

/// Gradient of var_dist_sq(target, atoms(b)) with respect to b's vertices.
template <DiscreteShape S>
PointList<S::kDim> var_dist_sq_grad(const VarifoldAtoms<S::kDim>& target, const S& b,
                                    const KernelConfig& kernel, int threads = 1) {
  PointList<S::kDim> grad(b.vertex_count());
  var_dist_sq_with_grad(target, std::numeric_limits<double>::quiet_NaN(), b,
                        std::span<const Point<S::kDim>>(b.vertices()),
                        std::span<Point<S::kDim>>(grad), kernel, threads);
  return grad;
}

/// Gram matrix of pairwise inner products <mu_i, mu_j>.
template <int D>
Eigen::MatrixXd var_gram(std::span<const VarifoldAtoms<D>> sets, const KernelConfig& kernel,
                         int threads = 1) {
  const auto n = static_cast<Eigen::Index>(sets.size());
  Eigen::MatrixXd g(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const double v = var_inner(sets[static_cast<std::size_t>(i)], sets[static_cast<std::size_t>(j)], kernel);
    g(i, j) = v;
    g(j, i) = v;
  });
  return g;
}

}  // namespace elasmatch
