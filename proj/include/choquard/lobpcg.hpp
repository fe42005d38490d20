#pragma once

#include <Eigen/Dense>
#include <functional>

namespace choquard {

/// Applies a symmetric operator (or preconditioner) to every column of a block.
using BlockOperator = std::function<void(const Eigen::MatrixXd& in, Eigen::MatrixXd& out)>;

struct LobpcgOptions {
  int nev = 1;            // wanted eigenpairs; the block may be wider
  double tol = 1e-8;      // on |A x - theta x| with |x| = 1 (Euclidean)
  int max_iter = 500;
  double drop_tol = 1e-13;  // relative Gram eigenvalue below which basis directions are dropped
};

struct LobpcgResult {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXd vectors;    // orthonormal columns
  Eigen::VectorXd residuals;  // Euclidean residual norms
  int iterations = 0;
  bool converged = false;
};

/// Block locally optimal preconditioned CG for the smallest eigenpairs of a symmetric operator.
/// Rayleigh-Ritz runs on span[X, W, P] orthonormalised through the eigen-decomposition of its Gram
/// matrix, which tolerates the near-dependence of P late in the iteration.
LobpcgResult lobpcg(const BlockOperator& A, const BlockOperator& T, Eigen::MatrixXd X, const LobpcgOptions& opt);

}  // namespace choquard
