#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "elasmatch/core/error.hpp"
#include "elasmatch/shapes/shape.hpp"

namespace elasmatch {

enum class PositionKernel { Gaussian, Cauchy };
enum class DirectionKernel { Linear, Squared };

inline std::string_view to_string(PositionKernel k) {
  return k == PositionKernel::Gaussian ? "gaussian" : "cauchy";
}
inline std::string_view to_string(DirectionKernel k) {
  return k == DirectionKernel::Linear ? "linear" : "squared";
}

/// Kernel of the RKHS on position x direction (x signal) space:
///   k((x,u,s),(y,v,t)) = k_pos(|x-y|) k_dir(u,v) [k_sig(s-t)]
/// with k_pos gaussian exp(-r^2/sigma^2) or cauchy 1/(1 + r^2/sigma^2),
/// k_dir <u,v> (oriented) or <u,v>^2 (orientation-blind), and an optional
/// gaussian signal kernel exp(-(s-t)^2/tau^2).
struct KernelConfig {
  PositionKernel position = PositionKernel::Gaussian;
  double sigma = 1.0;
  DirectionKernel direction = DirectionKernel::Linear;
  std::optional<double> signal_scale;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorKind::InvalidArgument, "position kernel scale must be positive");
    }
    if (signal_scale && (!(*signal_scale > 0.0) || !std::isfinite(*signal_scale))) {
      throw Error(ErrorKind::InvalidArgument, "signal kernel scale must be positive");
    }
  }

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

namespace detail {

/// Position kernel as a function of the squared distance, with its
/// derivative with respect to that squared distance.
struct RadialValue {
  double value;
  double d_r2;
};

inline RadialValue position_kernel(PositionKernel kind, double r2, double inv_sigma2) {
  if (kind == PositionKernel::Gaussian) {
    const double k = std::exp(-r2 * inv_sigma2);
    return {k, -k * inv_sigma2};
  }
  const double k = 1.0 / (1.0 + r2 * inv_sigma2);
  return {k, -k * k * inv_sigma2};
}

inline double signal_kernel(double s, double t, double inv_tau2) {
  const double d = s - t;
  return std::exp(-d * d * inv_tau2);
}

}  // namespace detail

}  // namespace elasmatch
