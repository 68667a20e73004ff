#pragma once

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elasmatch/core/parallel.hpp"
#include "elasmatch/matching/match.hpp"

namespace elasmatch {

struct PairDiagnostics {
  std::size_t row = 0;
  std::size_t col = 0;
  bool ok = false;
  double distance = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t stages = 0;
  bool converged = false;
  std::string error;
};

/// Raw entry (i, j) is the distance obtained with shape i as template and
/// shape j as target. Failed pairs are NaN and propagate to the symmetrized
/// matrix.
struct DistanceMatrixRecord {
  std::vector<std::string> ids;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd symmetrized;
  std::vector<PairDiagnostics> pairs;

  bool partial_failure() const {
    for (const auto& p : pairs) {
      if (!p.ok) return true;
    }
    return false;
  }
};

/// 1/2 (D + D^T) with an exactly zero diagonal.
inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd s = 0.5 * (raw + raw.transpose());
  s.diagonal().setZero();
  return s;
}

/// Matches every ordered pair of distinct shapes. Pairs run concurrently on
/// `threads` workers, each single-threaded inside, so the record does not
/// depend on the thread count.
template <DiscreteShape S>
DistanceMatrixRecord distance_matrix(const std::vector<std::string>& ids, const std::vector<S>& shapes,
                                     MatchConfig config, int threads = 1) {
  if (ids.size() != shapes.size()) throw Error(ErrorKind::ConfigError, "one identifier per shape required");
  if (shapes.size() < 2) throw Error(ErrorKind::ConfigError, "a distance matrix needs at least two shapes");
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorKind::ConfigError, "duplicate shape identifier '" + id + "'");
  }
  config.threads = 1;
  config.validate();

  const std::size_t n = shapes.size();
  DistanceMatrixRecord rec;
  rec.ids = ids;
  rec.raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) rec.pairs.push_back({i, j});
    }
  }
  parallel_for(rec.pairs.size(), threads, [&](std::size_t p) {
    PairDiagnostics& d = rec.pairs[p];
    try {
      const auto res = unparametrized_distance(shapes[d.row], shapes[d.col], config);
      d.distance = res.distance;
      d.final_residual = res.match.final_residual;
      d.stages = res.match.stages.size();
      d.converged = res.match.converged;
      d.ok = std::isfinite(res.distance) && !res.match.aborted;
      if (!d.ok) d.error = "non-finite energy";
    } catch (const std::exception& e) {
      d.ok = false;
      d.error = e.what();
    }
  });
  for (const auto& d : rec.pairs) {
    rec.raw(static_cast<Eigen::Index>(d.row), static_cast<Eigen::Index>(d.col)) =
        d.ok ? d.distance : std::numeric_limits<double>::quiet_NaN();
  }
  rec.symmetrized = symmetrize(rec.raw);
  return rec;
}

}  // namespace elasmatch
