#pragma once

#include <vector>

#include "choquard/functional.hpp"
#include "choquard/lobpcg.hpp"

namespace choquard {

struct EigenOptions {
  double tol = 1e-8;       // residual |L phi - zeta phi| / |phi|
  int max_iter = 500;
  int guard = 2;           // extra block columns beyond the wanted count
  double kappa = 1.0;      // shift in the (-Delta + kappa)^{-1} preconditioner
  int inner_steps = 8;     // inner PCG steps per preconditioner application (Schroedinger only)
};

struct DirichletEigs {
  Eigen::VectorXd values;      // beta_1 <= beta_2 <= ...
  std::vector<Field> fields;   // L^2-orthonormal, zero outside the mask
  Eigen::VectorXd residuals;
  int iterations = 0;
};

/// Smallest k eigenvalues of -Delta restricted to the grid points where mask > 0.5
/// (spectral Laplacian, values outside the mask held at zero).
DirichletEigs dirichlet_eigs(std::shared_ptr<const TensorGrid> grid, const Eigen::ArrayXd& mask, int k,
                             const EigenOptions& opt = {});

struct SpectralSplit {
  double lambda = 0.0;
  double beta = 0.0;
  Eigen::VectorXd zeta;        // eigenvalues of -Delta + lambda V - beta, ascending
  std::vector<Field> fields;   // L^2-orthonormal eigenfields
  Eigen::VectorXd residuals;
  int morse_index = 0;         // number of zeta < 0
  int iterations = 0;

  /// First morse_index eigenfields.
  std::vector<Field> negative_basis() const {
    return {fields.begin(), fields.begin() + morse_index};
  }
  /// Same eigenfields, spectrum shifted to another beta (re-checks degeneracy).
  SpectralSplit with_beta(double beta, double margin) const;
};

/// Smallest k eigenpairs of L = -Delta + lambda V - beta on the full grid. Throws DegenerateSplit
/// when some |zeta| < margin. `start` (fields) seeds the block when given.
SpectralSplit schrodinger_eigs(std::shared_ptr<const TensorGrid> grid, const Eigen::ArrayXd& V, double lambda,
                               double beta, int k, double margin, const EigenOptions& opt = {},
                               const std::vector<Field>& start = {});

/// max_{j} |<phi, psi_j>| style alignment: norm of the projection of `phi` on span(cluster).
double subspace_alignment(const Field& phi, const std::vector<Field>& cluster);

struct ReducedPoint {
  Field u_plus;
  Eigen::VectorXd coeffs;        // h(u_plus) in the E^- basis
  Field h;                       // sum coeffs_i e_i
  double upsilon = 0.0;          // J(u_plus + h)
  double residual = 0.0;         // max_i |<J'(u_plus + h), e_i>|
  Eigen::VectorXd hessian_eigs;  // coefficient-space Hessian of Phi_u at h (all < 0 expected)
  int newton_steps = 0;
  bool concave = false;
};

/// Remove the E^- components of a field.
Field project_plus(const std::vector<Field>& basis, const Field& u);

/// Coefficient-space Hessian of c -> J(w + sum c_i e_i) at w (columns of `dirs`):
/// <L a, b> - q <K*(|w|^{q-2} w a), |w|^{q-2} w b> - (q-1) <phi |w|^{q-2}, a b>.
Eigen::MatrixXd directional_hessian(const Model& m, const Field& w, const Eigen::ArrayXd& phi,
                                    const std::vector<Field>& dirs, const Eigen::MatrixXd& quadratic);

/// Maximiser of v -> J(u_plus + v) over span(E^-) by damped Newton.
ReducedPoint reduction_h(const Model& m, const SpectralSplit& split, const Field& u_plus, double tol = 1e-12,
                         int max_steps = 50);
double reduced_energy(const Model& m, const SpectralSplit& split, const Field& u_plus);

}  // namespace choquard
