#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "elasmatch/shapes/polyline.hpp"
#include "elasmatch/shapes/trimesh.hpp"

namespace elasmatch {

/// Splits every edge at its midpoint, `levels` times. Each child edge
/// inherits its parent's signal.
inline Polyline subdivide(const Polyline& curve, int levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "subdivision levels must be >= 1");
  PointList<2> v = curve.vertices();
  std::optional<std::vector<double>> signal = curve.signal();
  bool closed = curve.closed();
  for (int level = 0; level < levels; ++level) {
    const std::size_t cells = closed ? v.size() : v.size() - 1;
    PointList<2> next;
    next.reserve(2 * v.size());
    std::vector<double> next_signal;
    for (std::size_t c = 0; c < cells; ++c) {
      const auto& a = v[c];
      const auto& b = v[(c + 1) % v.size()];
      next.push_back(a);
      next.push_back(0.5 * (a + b));
      if (signal) {
        next_signal.push_back((*signal)[c]);
        next_signal.push_back((*signal)[c]);
      }
    }
    if (!closed) next.push_back(v.back());
    v = std::move(next);
    if (signal) signal = std::move(next_signal);
  }
  return Polyline(std::move(v), closed, std::move(signal));
}

/// 1-to-4 midpoint refinement, `levels` times. Child faces keep the parent's
/// orientation and signal; edge midpoints are shared between neighbours.
inline TriMesh subdivide(const TriMesh& mesh, int levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "subdivision levels must be >= 1");
  PointList<3> v = mesh.vertices();
  std::vector<Face> faces = mesh.faces();
  std::optional<std::vector<double>> signal = mesh.signal();
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
    auto midpoint = [&](std::size_t a, std::size_t b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = midpoints.try_emplace({key.first, key.second}, v.size());
      if (inserted) {
        const Point<3> m = 0.5 * (v[a] + v[b]);
        v.push_back(m);
      }
      return it->second;
    };
    std::vector<Face> next;
    next.reserve(4 * faces.size());
    std::vector<double> next_signal;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto [a, b, c] = faces[f];
      const std::size_t ab = midpoint(a, b);
      const std::size_t bc = midpoint(b, c);
      const std::size_t ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({ab, b, bc});
      next.push_back({ca, bc, c});
      next.push_back({ab, bc, ca});
      if (signal) next_signal.insert(next_signal.end(), 4, (*signal)[f]);
    }
    faces = std::move(next);
    if (signal) signal = std::move(next_signal);
  }
  return TriMesh(std::move(v), std::move(faces), std::move(signal));
}

}  // namespace elasmatch
