#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "elasmatch/shapes/shape.hpp"

namespace elasmatch {

using Face = std::array<std::size_t, 3>;

/// Oriented triangle mesh in R^3. The normal of face (a, b, c) is the
/// normalized cross product (b - a) x (c - a). An optional scalar signal is
/// attached per face.
class TriMesh {
 public:
  static constexpr int kDim = 3;
  using PointType = Point<3>;

  TriMesh(PointList<3> vertices, std::vector<Face> faces,
          std::optional<std::vector<double>> signal = std::nullopt)
      : vertices_(std::move(vertices)), faces_(std::move(faces)), signal_(std::move(signal)) {
    if (faces_.empty()) throw Error(ErrorKind::InvalidShape, "mesh has no faces");
    detail::check_finite<3>(vertices_);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (std::size_t idx : faces_[f]) {
        if (idx >= vertices_.size()) {
          throw Error(ErrorKind::InvalidShape, "face " + std::to_string(f) +
                                                   " references vertex " + std::to_string(idx) +
                                                   " out of " + std::to_string(vertices_.size()));
        }
      }
    }
    detail::check_signal(signal_, faces_.size());
    const double diag = bounding_box_diagonal<3>(vertices_);
    const double tol = kDegeneracyRelTol * diag * diag;
    for (std::size_t c = 0; c < faces_.size(); ++c) {
      const double area = area_vector(vertices_, c).norm();
      if (!(area > tol)) throw DegenerateCellError(c, area);
    }
  }

  const PointList<3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t cell_count() const noexcept { return faces_.size(); }
  const std::optional<std::vector<double>>& signal() const noexcept { return signal_; }

  /// Half the cross product of the two edge vectors leaving the first corner.
  PointType area_vector(std::span<const PointType> v, std::size_t c) const {
    const Face& f = faces_[c];
    return 0.5 * (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
  }

  PointType center(std::span<const PointType> v, std::size_t c) const {
    const Face& f = faces_[c];
    return (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0;
  }

  void scatter_gradient(std::span<const PointType> v, std::size_t c, const PointType& d_area,
                        const PointType& d_center, std::span<PointType> out) const {
    const Face& f = faces_[c];
    const PointType e1 = v[f[1]] - v[f[0]];
    const PointType e2 = v[f[2]] - v[f[0]];
    // d/de1 <g, e1 x e2> = e2 x g,  d/de2 <g, e1 x e2> = g x e1.
    const PointType g = 0.5 * d_area;
    const PointType d_e1 = e2.cross(g);
    const PointType d_e2 = g.cross(e1);
    const PointType share = d_center / 3.0;
    out[f[0]] += share - d_e1 - d_e2;
    out[f[1]] += share + d_e1;
    out[f[2]] += share + d_e2;
  }

  bool same_structure(const TriMesh& other) const noexcept {
    return vertices_.size() == other.vertices_.size() && faces_ == other.faces_;
  }

  TriMesh with_vertices(PointList<3> vertices) const {
    if (vertices.size() != vertices_.size()) {
      throw Error(ErrorKind::StructureMismatch, "vertex count changed");
    }
    return TriMesh(std::move(vertices), faces_, signal_);
  }

  TriMesh with_signal(std::optional<std::vector<double>> signal) const {
    return TriMesh(vertices_, faces_, std::move(signal));
  }

  /// Every face with two corners swapped, which negates all normals.
  TriMesh reversed() const {
    std::vector<Face> flipped = faces_;
    for (Face& f : flipped) std::swap(f[1], f[2]);
    return TriMesh(vertices_, std::move(flipped), signal_);
  }

  /// True if no directed edge is used by two faces. An inconsistent mesh is
  /// still usable; callers only warn.
  bool orientation_consistent() const {
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    for (const Face& f : faces_) {
      for (int k = 0; k < 3; ++k) {
        if (++directed[{f[k], f[(k + 1) % 3]}] > 1) return false;
      }
    }
    return true;
  }

  friend bool operator==(const TriMesh& a, const TriMesh& b) {
    return a.vertices_ == b.vertices_ && a.faces_ == b.faces_ && a.signal_ == b.signal_;
  }

 private:
  PointList<3> vertices_;
  std::vector<Face> faces_;
  std::optional<std::vector<double>> signal_;
};

static_assert(DiscreteShape<TriMesh>);

}  // namespace elasmatch
