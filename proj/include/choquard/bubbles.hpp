#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// Sharp HLS constant C(N, mu), evaluated through log-gamma.
template <class T>
T hls_constant(int dim, T mu) {
  using std::exp;
  using std::lgamma;
  using std::log;
  if (dim < 1 || !(mu > T(0) && mu < T(dim))) throw DomainError("HLS constant needs 0 < mu < N");
  const T n = T(dim);
  const T pi = std::numbers::pi_v<T>;
  const T log_c = mu / 2 * log(pi) + lgamma(n / 2 - mu / 2) - lgamma(n - mu / 2) +
                  (mu / n - 1) * (lgamma(n / 2) - lgamma(n));
  return exp(log_c);
}

/// U(r) = [N(N-2)]^{(N-2)/4} (1 + r^2)^{-(N-2)/2}.
template <class T>
T bubble_U(int dim, T r) {
  using std::pow;
  const T n = T(dim);
  return pow(n * (n - 2), (n - 2) / 4) * pow(1 + r * r, -(n - 2) / 2);
}

/// U_eps(r) = eps^{(2-N)/2} U(r / eps).
template <class T>
T bubble_U_eps(int dim, T eps, T r) {
  using std::pow;
  return pow(eps, T(2 - dim) / 2) * bubble_U(dim, r / eps);
}

/// Cutoff: 1 on [0, delta], 0 beyond 2 delta, quintic smoothstep (C^2) in between.
template <class T>
T cutoff_psi(T r, T delta) {
  if (r <= delta) return T(1);
  if (r >= 2 * delta) return T(0);
  const T s = (r - delta) / delta;
  return 1 - s * s * s * (10 - 15 * s + 6 * s * s);
}

template <class T>
T cutoff_bubble(int dim, T eps, T delta, T r) {
  return cutoff_psi(r, delta) * bubble_U_eps(dim, eps, r);
}

/// Factor k with U~ = k U, given S and C(N, mu).
double tilde_factor(int dim, double mu, double sobolev);

/// Radial grid used for constants unless a caller supplies one.
std::shared_ptr<const RadialGrid> default_radial_grid(int dim, int intervals = 20000);

/// Rayleigh quotient int |grad U|^2 / (int U^{2*})^{2/2*} on the grid.
double sobolev_constant(const RadialGrid& grid);
/// Same quotient for an arbitrary radial profile.
double sobolev_quotient(const RadialField& u);
/// Nonlocal quotient int |grad u|^2 / D(u)^{(N-2)/(2N-mu)}.
double shl_quotient(const RadialRieszTable& table, const RadialField& u);

struct ShlValues {
  double via_relation;
  double via_quotient;
};
ShlValues shl_constant(int dim, double mu, const RadialGrid& grid);

/// c_* = level_coeff * S_HL^{(2N-mu)/(N+2-mu)}.
double critical_level(int dim, double mu, double shl);

/// HLS ratio D_h / |h|_p^2 (q = 1 in D) with p = 2N/(2N - mu).
double hls_ratio(const RadialRieszTable& table, const RadialField& h);
/// h(r) = (gamma^2 + r^2)^{-(2N-mu)/2}.
RadialField hls_extremal(std::shared_ptr<const RadialGrid> grid, double mu, double gamma = 1.0);

RadialField bubble_tilde(std::shared_ptr<const RadialGrid> grid, double mu, double sobolev);

/// Relative weighted L^2 residual of -Delta v - (|x|^{-mu} * v^q) v^{q-1}, divided by |Delta v|_2.
double choquard_residual(const RadialRieszTable& table, const RadialField& v);

struct ConstantSet {
  int N = 0;
  double mu = 0.0;
  double C_hls = 0.0;
  double hls_ratio = 0.0;     // numerical HLS ratio of the extremal
  double S = 0.0;
  double S_HL = 0.0;          // S / C^{(N-2)/(2N-mu)}
  double S_HL_quotient = 0.0;
  double c_star = 0.0;
  double grad_tilde = 0.0;    // int |grad U~|^2
  double D_tilde = 0.0;       // D(U~)
  double tilde_target = 0.0;  // S_HL^{(2N-mu)/(N-mu+2)}
  double J_tilde = 0.0;       // J_*(U~)
  double residual = 0.0;      // choquard_residual(U~)
  double pohozaev = 0.0;      // relative Pohozaev residual of U~ with c0 = 0
  int grid_nodes = 0;
  double grid_r_max = 0.0;
  double grid_scale = 0.0;

  double relation_gap() const { return std::abs(S_HL - S_HL_quotient) / S_HL; }
};

/// Every constant for (N, mu); needs mu < N - 1 for the radial double integral.
ConstantSet compute_constants(int dim, double mu, int intervals = 20000);

struct AsymptoticRow {
  double eps;
  double grad_sq;   // int |grad u_eps|^2
  double D;         // D(u_eps) = nl_norm^{2 q}
  double l2_sq;     // int u_eps^2
  double remainder; // grad_sq - C^{(N-2)/(2N-mu) N/2} S_HL^{N/2}
  double l2_ratio;  // int u_eps^2 / (eps^2 |ln eps|) for N = 4, / eps^2 otherwise
  bool reliable;
  std::string note;
};

struct AsymptoticTable {
  int N;
  double mu;
  double delta;
  double target;             // C^{(N-2)/(2N-mu) N/2} S_HL^{N/2}
  std::vector<AsymptoticRow> rows;
  double remainder_exponent; // least squares on the three smallest reliable eps
  double l2_ratio_variation; // relative spread of l2_ratio over the two smallest reliable eps
};

AsymptoticTable bubble_asymptotics(int dim, double mu, const std::vector<double>& eps_list, double delta = 1.0,
                                   int intervals = 20000, bool with_nonlocal = true);

/// Slope of log|y| against log x by least squares.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace choquard
