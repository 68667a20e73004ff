#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "elasmatch/core/error.hpp"

namespace elasmatch {

template <int D>
using Point = Eigen::Matrix<double, D, 1>;

template <int D>
using PointList = std::vector<Point<D>>;

/// Cells below this fraction of the bounding-box diagonal (edges) or of its
/// square (faces) are degenerate.
inline constexpr double kDegeneracyRelTol = 1e-12;

/// A discrete oriented shape: vertices plus a fixed cell structure. Cells are
/// edges for curves and faces for meshes. The "area vector" of a cell is its
/// measure times its unit normal; everything downstream (SRNF, varifold atoms)
/// is a function of area vectors and centers, and gradients flow back through
/// scatter_gradient.
template <class S>
concept DiscreteShape = requires(const S& s, std::span<const Point<S::kDim>> v, std::size_t c,
                                 const Point<S::kDim>& g, std::span<Point<S::kDim>> out) {
  { S::kDim } -> std::convertible_to<int>;
  { s.vertices() } -> std::convertible_to<const PointList<S::kDim>&>;
  { s.vertex_count() } -> std::convertible_to<std::size_t>;
  { s.cell_count() } -> std::convertible_to<std::size_t>;
  { s.area_vector(v, c) } -> std::convertible_to<Point<S::kDim>>;
  { s.center(v, c) } -> std::convertible_to<Point<S::kDim>>;
  { s.signal() } -> std::convertible_to<const std::optional<std::vector<double>>&>;
  { s.same_structure(s) } -> std::convertible_to<bool>;
  s.scatter_gradient(v, c, g, g, out);
};

template <int D>
double bounding_box_diagonal(std::span<const Point<D>> vertices) {
  if (vertices.empty()) return 0.0;
  Point<D> lo = vertices.front();
  Point<D> hi = vertices.front();
  for (const auto& p : vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

template <int D>
Point<D> vertex_centroid(std::span<const Point<D>> vertices) {
  Point<D> sum = Point<D>::Zero();
  for (const auto& p : vertices) sum += p;
  return sum / static_cast<double>(vertices.size());
}

/// Diagonal of the bounding box aligned with the principal axes of the
/// vertex cloud. Unlike the axis-aligned diagonal it is unchanged by rigid
/// motions (up to rounding, and up to the choice of frame when principal
/// variances coincide).
template <int D>
double principal_box_diagonal(std::span<const Point<D>> vertices) {
  if (vertices.empty()) return 0.0;
  const Point<D> c = vertex_centroid<D>(vertices);
  Eigen::Matrix<double, D, D> cov = Eigen::Matrix<double, D, D>::Zero();
  for (const auto& p : vertices) cov += (p - c) * (p - c).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(cov);
  const Eigen::Matrix<double, D, D> axes = es.eigenvectors();
  Point<D> lo = axes.transpose() * (vertices.front() - c);
  Point<D> hi = lo;
  for (const auto& p : vertices) {
    const Point<D> y = axes.transpose() * (p - c);
    lo = lo.cwiseMin(y);
    hi = hi.cwiseMax(y);
  }
  return (hi - lo).norm();
}

template <int D>
Eigen::VectorXd flatten(std::span<const Point<D>> vertices) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(vertices.size()) * D);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    x.segment<D>(static_cast<Eigen::Index>(i) * D) = vertices[i];
  }
  return x;
}

template <int D>
PointList<D> unflatten(const Eigen::VectorXd& x) {
  PointList<D> out(static_cast<std::size_t>(x.size() / D));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x.segment<D>(static_cast<Eigen::Index>(i) * D);
  }
  return out;
}

namespace detail {

inline void check_signal(const std::optional<std::vector<double>>& signal, std::size_t cells) {
  if (!signal) return;
  if (signal->size() != cells) {
    throw Error(ErrorKind::InvalidShape, "signal has " + std::to_string(signal->size()) +
                                             " values but the shape has " +
                                             std::to_string(cells) + " cells");
  }
  for (double s : *signal) {
    if (!std::isfinite(s)) throw Error(ErrorKind::InvalidShape, "signal contains non-finite value");
  }
}

template <int D>
void check_finite(std::span<const Point<D>> vertices) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!vertices[i].allFinite()) {
      throw Error(ErrorKind::InvalidShape, "vertex " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace detail

}  // namespace elasmatch
