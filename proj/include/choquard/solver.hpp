#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "choquard/functional.hpp"
#include "choquard/spectra.hpp"

namespace choquard {

struct SolverOptions {
  double grad_tol = 1e-6;        // on sqrt(<g, P g> / A(u))
  int max_iter = 3000;
  double step_min = 1e-4;
  double step_max = 10.0;
  int divergence_window = 50;    // consecutive energy increases before giving up
  int memory = 10;               // nonmonotone reference window
  double kappa = 1.0;            // preconditioner shift; D = 1 + lambda V / kappa scales it
  double ps_factor = 10.0;       // bound on A+(u) + D(u) relative to the start
  int inner_steps = 12;          // PCG steps on -Delta + lambda V + kappa inside the preconditioner
  std::function<void(int, double, double)> trace;  // (iteration, J, gradient norm)
};

struct SolveResult {
  Field u;
  EnergyBreakdown e;
  double nehari_residual = 0.0;        // <J'(u), u> relative to A(u)
  double grad_norm = 0.0;
  std::optional<double> pohozaev;      // lambda = 0 runs, relative to (N-2)/2 int|grad u|^2
  Point barycenter;
  Point truncated_barycenter;
  std::optional<double> mass_outside;  // fraction of int u^2 outside the zero set / mask
  int iterations = 0;
  bool converged = false;
  std::string status;                  // converged | max_iter | zero_collapse
  double threshold = 0.0;              // c_*
  bool below_threshold = false;
  double ps_ratio = 0.0;               // max over the run of (A+ + D) / initial value
  std::vector<double> energies;

  // indefinite runs only
  Eigen::VectorXd coeffs;              // E^- coefficients of u
  double level_direct = 0.0;           // max of J over the half space through the final direction
  double reduction_residual = 0.0;
  Eigen::VectorXd hessian_eigs;
};

/// c_* from the closed-form C(N, mu) and the radial Sobolev quotient (cheap).
double threshold_level(int dim, double mu);

/// Cutoff bubble u_eps (delta = 2 eps) centered at `center`.
Field bubble_seed(std::shared_ptr<const TensorGrid> g, double eps, const Point& center);

/// Ball of radius L - 2h (Dirichlet stand-in for R^N on the periodic box).
Eigen::ArrayXd inscribed_ball_mask(const TensorGrid& g);

/// D^{-1/2} (-Delta + kappa)^{-1} D^{-1/2} with D = 1 + lambda V / kappa, sandwiched by the mask
/// when the model has one.
Field precondition(const Model& m, const Field& g, double kappa);
/// `steps` iterations of CG on (-Delta + lambda V + kappa) x = g from x = 0, preconditioned by the above.
/// <g, P g> > 0 for every g, so P g stays a descent direction.
Field precondition_krylov(const Model& m, const Field& g, double kappa, int steps);

/// Nehari projected descent for the definite problem (or the masked limit problem when m.mask is set).
/// With lambda = 0 and no mask the fields are held at zero outside the inscribed ball of radius L - 2h.
SolveResult ground_state_definite(const Model& m, const Field& init, const SolverOptions& opt = {});

/// Definite solve restricted to the mask (values outside held at zero, beta only).
SolveResult ground_state_limit_problem(const Model& m, const Eigen::ArrayXd& mask, double beta, const Field& init,
                                       const SolverOptions& opt = {});

/// Minimises the reduced functional over directions in E^+; needs morse_index >= 1.
SolveResult ground_state_indefinite(const Model& m, const SpectralSplit& split, const Field& init,
                                    const SolverOptions& opt = {});

/// max over c of J on the half space {t (w + sum c_i e_i), t > 0}, by golden section per coordinate.
double halfspace_max(const Model& m, const SpectralSplit& split, const Field& w);

struct LambdaRow {
  double lambda = 0.0;
  SolveResult result;
  double potential_mass = 0.0;  // int V u^2
  double h1_distance = 0.0;     // |grad (u - u_limit)|_2
};
struct LambdaSweep {
  std::vector<LambdaRow> rows;
  SolveResult limit;
  bool mass_decreasing = false;
  bool distance_decreasing = false;
  bool energy_nondecreasing = false;
  bool below_limit = false;     // c_lambda <= c(beta, Omega) for all rows
};
/// Continuation over increasing lambda (each solve warm-starts from the previous one).
LambdaSweep lambda_sweep(const Model& base, const std::vector<double>& lambdas, const Field& init,
                         const SolverOptions& opt = {});

struct BetaRow {
  double beta = 0.0;
  SolveResult result;
  double t_beta = 0.0;  // Nehari scaling of u_beta for the lambda = beta = 0 functional
};
struct BetaSweep {
  std::vector<BetaRow> rows;
  double c_star = 0.0;
  SolveResult reference;        // beta = 0 on the same mask and grid: the grid's own value of c_*
  bool t_converging = false;    // |t_beta - 1| decreasing
  bool gap_decreasing = false;  // c_* - c(beta) decreasing
  bool grid_gap_decreasing = false;  // reference level - c(beta) positive and decreasing
  bool below_threshold = false;
};
/// Masked limit problem along a decreasing list of beta (each solve warm-starts from the previous one),
/// closed by a beta = 0 reference solve on the same mask.
BetaSweep beta_sweep(const Model& base, const Eigen::ArrayXd& mask, const std::vector<double>& betas,
                     const Field& init, const SolverOptions& opt = {});

struct MultiplicityReport {
  std::vector<SolveResult> solutions;
  std::vector<int> cluster_of;        // per solution, -1 when not converged
  int clusters = 0;
  bool barycenters_in_neighbourhood = false;  // every truncated barycenter within 2r of the zero set
};
/// Multistart from translated bubbles; distinct = barycenters further apart than r/2 and fields
/// further apart than 10% in L^2.
MultiplicityReport multistart_multiplicity(const Model& m, const std::vector<Field>& seeds, double r,
                                           const SolverOptions& opt = {});

}  // namespace choquard
