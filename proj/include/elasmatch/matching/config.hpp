#pragma once

#include <optional>
#include <vector>

#include "elasmatch/core/error.hpp"
#include "elasmatch/optimize/lbfgs.hpp"
#include "elasmatch/varifold/kernel.hpp"

namespace elasmatch {

enum class InitMode { Template, Custom };

inline std::string_view to_string(InitMode m) { return m == InitMode::Template ? "template" : "custom"; }

/// Settings of the staged minimization of
///   |q_{f0} - q_f|^2 + lambda * dist_var(f, f1)^2.
///
/// For every position-kernel scale in `sigma_schedule` (fractions of the
/// diagonal of the target's principal-axis bounding box, coarse to fine) up
/// to `max_stages` minimizations run, multiplying lambda by `rho` after each one whose
/// varifold residual exceeds `residual_tolerance * sqrt(<mu_f1, mu_f1>)`.
/// `lambda0` applies at the first scale and defaults to 1 / <mu_f1, mu_f1>
/// under that kernel. On later scales lambda keeps the same product
/// lambda * <mu_f1, mu_f1> it ended with on the previous scale.
struct MatchConfig {
  KernelConfig kernel;
  std::optional<double> lambda0;
  double rho = 10.0;
  int max_stages = 4;
  std::vector<double> sigma_schedule{0.4, 0.2, 0.1};
  double residual_tolerance = 1e-3;
  LbfgsSettings optimizer;
  InitMode init = InitMode::Template;
  int threads = 1;

  void validate() const {
    if (lambda0 && !(*lambda0 > 0.0)) throw Error(ErrorKind::ConfigError, "lambda0 must be positive");
    if (!(rho > 1.0)) throw Error(ErrorKind::ConfigError, "rho must exceed 1");
    if (max_stages < 1) throw Error(ErrorKind::ConfigError, "max_stages must be at least 1");
    if (sigma_schedule.empty()) throw Error(ErrorKind::ConfigError, "sigma schedule is empty");
    for (std::size_t i = 0; i < sigma_schedule.size(); ++i) {
      if (!(sigma_schedule[i] > 0.0)) throw Error(ErrorKind::ConfigError, "sigma fractions must be positive");
      if (i > 0 && !(sigma_schedule[i] < sigma_schedule[i - 1])) {
        throw Error(ErrorKind::ConfigError, "sigma schedule must be strictly decreasing");
      }
    }
    if (!(residual_tolerance > 0.0)) throw Error(ErrorKind::ConfigError, "residual tolerance must be positive");
    if (threads < 1) throw Error(ErrorKind::ConfigError, "threads must be at least 1");
    if (kernel.signal_scale && !(*kernel.signal_scale > 0.0)) {
      throw Error(ErrorKind::ConfigError, "signal kernel scale must be positive");
    }
  }
};

}  // namespace elasmatch
