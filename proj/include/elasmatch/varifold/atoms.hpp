#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "elasmatch/core/summation.hpp"
#include "elasmatch/shapes/shape.hpp"

namespace elasmatch {

/// Weighted Dirac varifold: one atom per cell at the cell center, carrying the
/// cell's unit normal, its measure as weight, and optionally its signal.
template <int D>
struct VarifoldAtoms {
  PointList<D> centers;
  PointList<D> normals;
  std::vector<double> weights;
  std::optional<std::vector<double>> signal;

  std::size_t size() const noexcept { return weights.size(); }
  double total_weight() const { return compensated_sum(weights); }
};

template <DiscreteShape S>
VarifoldAtoms<S::kDim> atoms(const S& shape, std::span<const Point<S::kDim>> vertices) {
  constexpr int D = S::kDim;
  const double diag = bounding_box_diagonal<D>(vertices);
  const double tol = D == 2 ? kDegeneracyRelTol * diag : kDegeneracyRelTol * diag * diag;
  VarifoldAtoms<D> out;
  const std::size_t n = shape.cell_count();
  out.centers.reserve(n);
  out.normals.reserve(n);
  out.weights.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Point<D> area = shape.area_vector(vertices, c);
    const double m = area.norm();
    if (!(m > tol)) throw DegenerateCellError(c, m);
    out.centers.push_back(shape.center(vertices, c));
    out.normals.push_back(area / m);
    out.weights.push_back(m);
  }
  out.signal = shape.signal();
  return out;
}

template <DiscreteShape S>
VarifoldAtoms<S::kDim> atoms(const S& shape) {
  return atoms(shape, std::span<const Point<S::kDim>>(shape.vertices()));
}

/// Union of several atom sets, i.e. the varifold of a shape with several
/// disjoint parts. The result carries signals only if every part does.
template <int D>
VarifoldAtoms<D> merge_atoms(std::span<const VarifoldAtoms<D>> parts) {
  VarifoldAtoms<D> out;
  bool all_signals = !parts.empty();
  for (const auto& p : parts) all_signals = all_signals && p.signal.has_value();
  if (all_signals) out.signal.emplace();
  for (const auto& p : parts) {
    out.centers.insert(out.centers.end(), p.centers.begin(), p.centers.end());
    out.normals.insert(out.normals.end(), p.normals.begin(), p.normals.end());
    out.weights.insert(out.weights.end(), p.weights.begin(), p.weights.end());
    if (all_signals) out.signal->insert(out.signal->end(), p.signal->begin(), p.signal->end());
  }
  return out;
}

}  // namespace elasmatch
