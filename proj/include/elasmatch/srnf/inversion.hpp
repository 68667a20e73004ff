#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "elasmatch/core/summation.hpp"
#include "elasmatch/shapes/polyline.hpp"
#include "elasmatch/srnf/srnf.hpp"

namespace elasmatch {

namespace detail {

/// Edge vectors whose SRNF is q: e_c = rot_{-90}(q_c) |q_c|.
inline PointList<2> edges_from_srnf(const SrnfField<2>& q) {
  if (q.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty SRNF field");
  CompensatedSum total;
  for (const auto& qc : q.q) total += qc.squaredNorm();
  const double tol = kDegeneracyRelTol * total.value();
  PointList<2> edges;
  edges.reserve(q.size());
  for (std::size_t c = 0; c < q.size(); ++c) {
    const double len = q.q[c].squaredNorm();
    if (!(len > tol)) {
      throw Error(ErrorKind::ZeroCell, "SRNF cell " + std::to_string(c) + " vanishes");
    }
    edges.push_back(rotate_cw(q.q[c]) * std::sqrt(len));
  }
  return edges;
}

inline double srnf_residual(const Polyline& curve, const SrnfField<2>& q) {
  return std::sqrt(srnf_field_dist_sq(srnf(curve), q));
}

}  // namespace detail

/// Exact inverse of the SRNF map for open curves: the returned polyline starts
/// at `base` and has SRNF q.
inline Polyline srnf_invert_open(const SrnfField<2>& q, const Point<2>& base) {
  const PointList<2> edges = detail::edges_from_srnf(q);
  PointList<2> v;
  v.reserve(edges.size() + 1);
  v.push_back(base);
  for (const auto& e : edges) v.push_back(v.back() + e);
  return Polyline(std::move(v), false);
}

struct ClosedInversion {
  Polyline curve;
  /// Norm of the sum of the raw edge vectors before closing.
  double gap = 0.0;
  /// Norm of the sum of the corrected edge vectors (rounding only).
  double closure_error = 0.0;
  /// ||srnf(curve) - q||_L2.
  double residual = 0.0;
};

/// Approximate inverse for closed curves. The raw edges are integrated as for
/// open curves and the closure gap is removed by subtracting from each edge a
/// share of the gap proportional to its length. The SRNF residual of the
/// result is reported; it is zero when q is the SRNF of a closed curve.
inline ClosedInversion srnf_invert_closed(const SrnfField<2>& q, const Point<2>& base) {
  PointList<2> edges = detail::edges_from_srnf(q);
  CompensatedSum gx, gy, total_len;
  for (const auto& e : edges) {
    gx += e.x();
    gy += e.y();
    total_len += e.norm();
  }
  const Point<2> gap(gx.value(), gy.value());
  const double length = total_len.value();
  for (auto& e : edges) e -= gap * (e.norm() / length);

  PointList<2> v;
  v.reserve(edges.size());
  v.push_back(base);
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) v.push_back(v.back() + edges[c]);
  const Point<2> closure = v.back() + edges.back() - base;

  Polyline curve(std::move(v), true);
  const double residual = detail::srnf_residual(curve, q);
  return {std::move(curve), gap.norm(), closure.norm(), residual};
}

struct InterpolationFrame {
  double t = 0.0;
  Polyline curve;
  double residual = 0.0;
};

/// Curves along the straight line between the SRNFs of a and b, inverted
/// frame by frame. SRNFs carry no translation, so each frame's vertex
/// centroid is placed on the segment between the centroids of a and b.
/// Frames carry a's signal.
inline std::vector<InterpolationFrame> srnf_interpolate(const Polyline& a, const Polyline& b, int steps) {
  if (steps < 2) throw Error(ErrorKind::InvalidArgument, "interpolation needs at least 2 steps");
  detail::require_same_structure(a, b);
  const SrnfField<2> qa = srnf(a);
  const SrnfField<2> qb = srnf(b);
  const Point<2> ca = vertex_centroid<2>(a.vertices());
  const Point<2> cb = vertex_centroid<2>(b.vertices());

  std::vector<InterpolationFrame> frames;
  frames.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    SrnfField<2> qt;
    qt.q.reserve(qa.size());
    for (std::size_t c = 0; c < qa.size(); ++c) qt.q.push_back((1.0 - t) * qa.q[c] + t * qb.q[c]);

    try {
      Polyline raw = a.closed() ? srnf_invert_closed(qt, Point<2>::Zero()).curve
                                : srnf_invert_open(qt, Point<2>::Zero());
      const Point<2> shift = (1.0 - t) * ca + t * cb - vertex_centroid<2>(raw.vertices());
      PointList<2> v = raw.vertices();
      for (auto& p : v) p += shift;
      Polyline curve(std::move(v), a.closed(), a.signal());
      const double residual = detail::srnf_residual(curve, qt);
      frames.push_back({t, std::move(curve), residual});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroCell) throw;
      std::ostringstream msg;
      msg << "interpolated SRNF vanishes at t=" << t << " (" << e.what() << ")";
      throw Error(ErrorKind::ZeroCell, msg.str());
    }
  }
  return frames;
}

}  // namespace elasmatch
