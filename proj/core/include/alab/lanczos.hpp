#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "alab/hamiltonian.hpp"

namespace alab {

struct EigenOptions {
  /// Below this dimension a dense symmetric eigensolver is used.
  std::size_t dense_threshold = 500;
  /// Residual certificate ||A v - lambda v|| <= tolerance * ||v||.
  double tolerance = 1e-8;
  int max_restarts = 400;
  /// Krylov subspace size; 0 picks max(2k + 20, 40) capped by the dimension.
  int krylov_dim = 0;
  std::uint64_t start_seed = 0x5EEDULL;
};

struct EigenPairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< unit columns matching `values`
  std::vector<double> residuals;
  Eigen::VectorXd spectrum; ///< full spectrum, dense path only
  bool dense = false;
  int restarts = 0;
};

/// k smallest eigenpairs of a symmetric sparse matrix. The iterative path
/// runs thick-restart Lanczos on (A - sigma)^-1 with sigma below the
/// Gershgorin bound. Throws NumericError carrying the best residual when
/// the certificate is not met within the restart budget.
EigenPairs lowest_eigenpairs(const SparseMatrix& a, int k, const EigenOptions& opts = {});

/// k eigenpairs closest to `target`, by shift-invert about the target.
/// Throws SpectralCollision when A - target is exactly singular.
EigenPairs nearest_eigenpairs(const SparseMatrix& a, double target, int k,
                              const EigenOptions& opts = {});

/// min_i (A_ii - sum_{j != i} |A_ij|).
double gershgorin_lower_bound(const SparseMatrix& a);

}  // namespace alab
