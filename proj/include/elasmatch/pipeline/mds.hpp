#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "elasmatch/core/error.hpp"

namespace elasmatch {

struct MdsResult {
  /// One row per input point, `dim` columns.
  Eigen::MatrixXd coordinates;
  /// All eigenvalues of the double-centred matrix, descending.
  Eigen::VectorXd eigenvalues;
  /// Number of selected eigenvalues that were negative and clamped to zero.
  int clamped = 0;
};

/// Checks that `d` is a square, symmetric, non-negative matrix with zero
/// diagonal. Symmetry is tested relative to the largest entry.
inline void validate_distance_matrix(const Eigen::MatrixXd& d, double rel_tol = 1e-12) {
  if (d.rows() != d.cols()) throw Error(ErrorKind::NonSymmetricInput, "distance matrix is not square");
  if (!d.allFinite()) throw Error(ErrorKind::InvalidArgument, "distance matrix has missing or non-finite entries");
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw Error(ErrorKind::InvalidArgument, "distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (d(i, j) < 0.0) throw Error(ErrorKind::InvalidArgument, "distance matrix has negative entries");
      if (std::abs(d(i, j) - d(j, i)) > rel_tol * scale) {
        throw Error(ErrorKind::NonSymmetricInput, "distance matrix is not symmetric at (" +
                                                      std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

/// Classical (Torgerson) multidimensional scaling: eigen-decompose
/// B = -1/2 J D^2 J with J the centring matrix and embed with the top `dim`
/// eigenvectors scaled by the square roots of their eigenvalues. Eigenvector
/// signs are fixed so that each column's largest-magnitude entry is positive.
inline MdsResult classical_mds(const Eigen::MatrixXd& distances, int dim) {
  validate_distance_matrix(distances);
  const Eigen::Index n = distances.rows();
  if (dim < 1 || dim > n) {
    throw Error(ErrorKind::InvalidArgument, "embedding dimension " + std::to_string(dim) +
                                                " is outside [1, " + std::to_string(n) + "]");
  }
  const Eigen::MatrixXd sq = distances.array().square().matrix();
  const Eigen::MatrixXd centring =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd b = -0.5 * centring * sq * centring;
  b = 0.5 * (b + b.transpose());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFiniteValue, "eigen-decomposition failed");
  }
  MdsResult out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.coordinates.resize(n, dim);
  for (int k = 0; k < dim; ++k) {
    const Eigen::Index col = n - 1 - k;
    double lambda = solver.eigenvalues()(col);
    if (lambda < 0.0) {
      lambda = 0.0;
      ++out.clamped;
    }
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    out.coordinates.col(k) = std::sqrt(lambda) * v;
  }
  return out;
}

}  // namespace elasmatch
