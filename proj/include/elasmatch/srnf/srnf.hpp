#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "elasmatch/core/summation.hpp"
#include "elasmatch/shapes/shape.hpp"

namespace elasmatch {

/// Discrete square root normal field: one vector per cell,
/// q_c = n_c * sqrt(measure_c), so |q_c|^2 is the cell measure.
template <int D>
struct SrnfField {
  PointList<D> q;

  std::size_t size() const noexcept { return q.size(); }
  static constexpr int dimension() noexcept { return D; }
};

namespace detail {

template <int D>
double degeneracy_tolerance(std::span<const Point<D>> vertices) {
  const double diag = bounding_box_diagonal<D>(vertices);
  return D == 2 ? kDegeneracyRelTol * diag : kDegeneracyRelTol * diag * diag;
}

template <DiscreteShape S>
void require_same_structure(const S& a, const S& b) {
  if (!a.same_structure(b)) {
    throw Error(ErrorKind::StructureMismatch,
                "shapes do not share a cell structure (" + std::to_string(a.cell_count()) + " vs " +
                    std::to_string(b.cell_count()) + " cells)");
  }
}

}  // namespace detail

/// SRNF of `shape`'s cell structure placed at `vertices`.
template <DiscreteShape S>
SrnfField<S::kDim> srnf(const S& shape, std::span<const Point<S::kDim>> vertices) {
  constexpr int D = S::kDim;
  const double tol = detail::degeneracy_tolerance<D>(vertices);
  SrnfField<D> field;
  field.q.reserve(shape.cell_count());
  for (std::size_t c = 0; c < shape.cell_count(); ++c) {
    const Point<D> area = shape.area_vector(vertices, c);
    const double m = area.norm();
    if (!(m > tol)) throw DegenerateCellError(c, m);
    field.q.push_back(area / std::sqrt(m));
  }
  return field;
}

template <DiscreteShape S>
SrnfField<S::kDim> srnf(const S& shape) {
  return srnf(shape, std::span<const Point<S::kDim>>(shape.vertices()));
}

/// Sum over cells of |q_a - q_b|^2 with compensated accumulation.
template <int D>
double srnf_field_dist_sq(const SrnfField<D>& a, const SrnfField<D>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::StructureMismatch, "SRNF fields have different cell counts");
  }
  CompensatedSum acc;
  for (std::size_t c = 0; c < a.size(); ++c) acc += (a.q[c] - b.q[c]).squaredNorm();
  return acc.value();
}

/// Squared L2 distance between the SRNFs of two immersions of the same cell
/// structure. Invariant under translating either shape.
template <DiscreteShape S>
double srnf_dist_sq(const S& a, const S& b) {
  detail::require_same_structure(a, b);
  return srnf_field_dist_sq(srnf(a), srnf(b));
}

/// Value of sum_c |q_ref_c - q_c(vertices)|^2 and its gradient with respect to
/// `vertices`, which are positions for `structure`'s cells. The gradient is
/// written (not accumulated) into `grad`.
template <DiscreteShape S>
double srnf_dist_sq_with_grad(const S& structure, const SrnfField<S::kDim>& reference,
                              std::span<const Point<S::kDim>> vertices,
                              std::span<Point<S::kDim>> grad) {
  constexpr int D = S::kDim;
  if (reference.size() != structure.cell_count() || vertices.size() != structure.vertex_count() ||
      grad.size() != vertices.size()) {
    throw Error(ErrorKind::StructureMismatch, "SRNF reference does not match the cell structure");
  }
  for (auto& g : grad) g.setZero();
  const double tol = detail::degeneracy_tolerance<D>(vertices);
  CompensatedSum acc;
  for (std::size_t c = 0; c < structure.cell_count(); ++c) {
    const Point<D> area = structure.area_vector(vertices, c);
    const double m = area.norm();
    if (!(m > tol)) throw DegenerateCellError(c, m);
    const double sqrt_m = std::sqrt(m);
    const double inv_sqrt_m = 1.0 / sqrt_m;
    const Point<D> q = area / sqrt_m;
    const Point<D> r = 2.0 * (q - reference.q[c]);
    acc += 0.25 * r.squaredNorm();
    // dq/du = m^{-1/2} (I - n n^T / 2), symmetric.
    const Point<D> n = area / m;
    const Point<D> d_area = inv_sqrt_m * (r - 0.5 * n.dot(r) * n);
    structure.scatter_gradient(vertices, c, d_area, Point<D>::Zero(), grad);
  }
  return acc.value();
}

/// Gradient of srnf_dist_sq(a, b) with respect to b's vertices.
template <DiscreteShape S>
PointList<S::kDim> srnf_dist_sq_grad(const S& a, const S& b) {
  detail::require_same_structure(a, b);
  PointList<S::kDim> grad(b.vertex_count());
  srnf_dist_sq_with_grad(b, srnf(a), std::span<const Point<S::kDim>>(b.vertices()),
                         std::span<Point<S::kDim>>(grad));
  return grad;
}

}  // namespace elasmatch
