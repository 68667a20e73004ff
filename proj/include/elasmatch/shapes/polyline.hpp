#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "elasmatch/shapes/shape.hpp"

namespace elasmatch {

/// Rotation by +90 degrees, (x, y) -> (-y, x).
inline Point<2> rotate_ccw(const Point<2>& v) { return {-v.y(), v.x()}; }

/// Rotation by -90 degrees, (x, y) -> (y, -x). Inverse of rotate_ccw.
inline Point<2> rotate_cw(const Point<2>& v) { return {v.y(), -v.x()}; }

/// Planar piecewise-linear curve. Cell c is the edge from vertex c to vertex
/// c + 1 (wrapping for closed curves); its normal is the tangent rotated by
/// +90 degrees. An optional scalar signal is attached per edge.
class Polyline {
 public:
  static constexpr int kDim = 2;
  using PointType = Point<2>;

  Polyline(PointList<2> vertices, bool closed,
           std::optional<std::vector<double>> signal = std::nullopt)
      : vertices_(std::move(vertices)), closed_(closed), signal_(std::move(signal)) {
    const std::size_t min_vertices = closed_ ? 3 : 2;
    if (vertices_.size() < min_vertices) {
      throw Error(ErrorKind::InvalidShape,
                  std::string(closed_ ? "closed" : "open") + " polyline needs at least " +
                      std::to_string(min_vertices) + " vertices, got " +
                      std::to_string(vertices_.size()));
    }
    detail::check_finite<2>(vertices_);
    detail::check_signal(signal_, cell_count());
    const double tol = kDegeneracyRelTol * bounding_box_diagonal<2>(vertices_);
    for (std::size_t c = 0; c < cell_count(); ++c) {
      const double length = area_vector(vertices_, c).norm();
      if (!(length > tol)) throw DegenerateCellError(c, length);
    }
  }

  const PointList<2>& vertices() const noexcept { return vertices_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  bool closed() const noexcept { return closed_; }
  const std::optional<std::vector<double>>& signal() const noexcept { return signal_; }

  std::size_t cell_count() const noexcept {
    return closed_ ? vertices_.size() : vertices_.size() - 1;
  }

  std::pair<std::size_t, std::size_t> edge(std::size_t c) const noexcept {
    return {c, (c + 1) % vertices_.size()};
  }

  PointType edge_vector(std::span<const PointType> v, std::size_t c) const {
    const auto [i, j] = edge(c);
    return v[j] - v[i];
  }

  PointType area_vector(std::span<const PointType> v, std::size_t c) const {
    return rotate_ccw(edge_vector(v, c));
  }

  PointType center(std::span<const PointType> v, std::size_t c) const {
    const auto [i, j] = edge(c);
    return 0.5 * (v[i] + v[j]);
  }

  /// Accumulates the vertex gradient of a function of (area_vector, center)
  /// of cell c, given its partial derivatives.
  void scatter_gradient(std::span<const PointType> /*v*/, std::size_t c, const PointType& d_area,
                        const PointType& d_center, std::span<PointType> out) const {
    const auto [i, j] = edge(c);
    const PointType d_edge = rotate_cw(d_area);
    out[j] += d_edge + 0.5 * d_center;
    out[i] += -d_edge + 0.5 * d_center;
  }

  bool same_structure(const Polyline& other) const noexcept {
    return closed_ == other.closed_ && vertices_.size() == other.vertices_.size();
  }

  /// Same structure and signal, new vertex positions (validated).
  Polyline with_vertices(PointList<2> vertices) const {
    if (vertices.size() != vertices_.size()) {
      throw Error(ErrorKind::StructureMismatch, "vertex count changed");
    }
    return Polyline(std::move(vertices), closed_, signal_);
  }

  Polyline with_signal(std::optional<std::vector<double>> signal) const {
    return Polyline(vertices_, closed_, std::move(signal));
  }

  /// Same point set traversed in the opposite direction. Per-edge signals
  /// follow their edges.
  Polyline reversed() const {
    PointList<2> v(vertices_.rbegin(), vertices_.rend());
    std::optional<std::vector<double>> s;
    if (signal_) {
      if (closed_) {
        // Edge (i, i+1) becomes edge (n-2-i, n-1-i) after reversal, wrapping.
        const std::size_t n = vertices_.size();
        std::vector<double> r(n);
        for (std::size_t c = 0; c < n; ++c) r[(2 * n - 2 - c) % n] = (*signal_)[c];
        s = std::move(r);
      } else {
        s = std::vector<double>(signal_->rbegin(), signal_->rend());
      }
    }
    return Polyline(std::move(v), closed_, std::move(s));
  }

  friend bool operator==(const Polyline& a, const Polyline& b) {
    return a.closed_ == b.closed_ && a.vertices_ == b.vertices_ && a.signal_ == b.signal_;
  }

 private:
  PointList<2> vertices_;
  bool closed_;
  std::optional<std::vector<double>> signal_;
};

static_assert(DiscreteShape<Polyline>);

}  // namespace elasmatch
