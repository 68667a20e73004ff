#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "elasmatch/core/summation.hpp"
#include "elasmatch/shapes/polyline.hpp"
#include "elasmatch/shapes/trimesh.hpp"

namespace elasmatch {

/// Per-cell geometric quantities. Tangents are filled for curves only.
template <int D>
struct CellGeometry {
  PointList<D> normals;
  PointList<D> tangents;
  PointList<D> centers;
  std::vector<double> measures;

  std::size_t size() const noexcept { return measures.size(); }
  double total_measure() const { return compensated_sum(measures); }
};

/// Geometry of `shape`'s cells evaluated at the given vertex positions, which
/// must match the shape's vertex count. Throws DegenerateCellError if a cell
/// measure falls to the relative degeneracy threshold.
template <DiscreteShape S>
CellGeometry<S::kDim> cell_geometry(const S& shape, std::span<const Point<S::kDim>> vertices) {
  constexpr int D = S::kDim;
  if (vertices.size() != shape.vertex_count()) {
    throw Error(ErrorKind::StructureMismatch, "vertex count does not match shape");
  }
  const double diag = bounding_box_diagonal<D>(vertices);
  const double tol = D == 2 ? kDegeneracyRelTol * diag : kDegeneracyRelTol * diag * diag;

  const std::size_t n = shape.cell_count();
  CellGeometry<D> g;
  g.normals.reserve(n);
  g.centers.reserve(n);
  g.measures.reserve(n);
  if constexpr (D == 2) g.tangents.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Point<D> area = shape.area_vector(vertices, c);
    const double m = area.norm();
    if (!(m > tol)) throw DegenerateCellError(c, m);
    g.normals.push_back(area / m);
    g.centers.push_back(shape.center(vertices, c));
    g.measures.push_back(m);
    if constexpr (D == 2) g.tangents.push_back(rotate_cw(area / m));
  }
  return g;
}

template <DiscreteShape S>
CellGeometry<S::kDim> cell_geometry(const S& shape) {
  return cell_geometry(shape, std::span<const Point<S::kDim>>(shape.vertices()));
}

}  // namespace elasmatch
