#pragma once

#include <memory>
#include <optional>
#include <span>

#include "choquard/grid.hpp"
#include "choquard/params.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// Everything an energy evaluation needs on one tensor grid. With a mask set, the model is
/// the bounded-domain problem: fields are zero outside the mask.
struct Model {
  ProblemParams params;
  std::shared_ptr<const TensorGrid> grid;
  Eigen::ArrayXd V;                      // potential samples (zero when absent)
  std::shared_ptr<const RieszOperator> riesz;
  std::optional<Eigen::ArrayXd> mask;    // 1 inside, 0 outside
  double q = 0.0;                        // 2 mu*, or an override for subcritical runs
  // Nonlocal term evaluated on the band-limited part B u (|k| <= pi/h). Beyond that band the sampled
  // |u|^q overweights sub-cell bumps and the discrete critical quotient falls far below S_HL, which
  // lets descent collapse onto grid-scale spikes.
  bool dealias = true;

  static Model make(const ProblemParams& p, std::shared_ptr<const TensorGrid> g, const Potential* V = nullptr,
                    std::shared_ptr<const RieszOperator> riesz = nullptr);
  /// Same operator and grid, other parameters (the Riesz operator is reused).
  Model with_params(const ProblemParams& p) const;
  Model with_potential(Eigen::ArrayXd V) const;
  Model limit_problem(Eigen::ArrayXd mask, double beta) const;
};

struct EnergyBreakdown {
  double dirichlet = 0.0;  // int |grad u|^2
  double potential = 0.0;  // lambda int V u^2
  double mass = 0.0;       // int u^2
  double nonlocal = 0.0;   // D(u)
  double A = 0.0;          // dirichlet + potential - beta mass
  double J = 0.0;          // A/2 - nonlocal/(2q)
  double q = 0.0;

  EnergyBreakdown scaled(double t) const;
};

EnergyBreakdown energy(const Model& m, const Field& u);
/// Weak-form residual -Delta u + (lambda V - beta) u - (|x|^{-mu} * |u|^q)|u|^{q-2}u
/// (with dealiasing: the last term is B[(|x|^{-mu} * |Bu|^q)|Bu|^{q-2}Bu]).
Field gradient(const Model& m, const Field& u);

struct Evaluation {
  EnergyBreakdown e;
  Field grad;
  Eigen::ArrayXd phi;        // |x|^{-mu} * |u|^q (of B u when dealiased)
  Eigen::ArrayXd nonlinear;  // the nonlocal part of the residual, before masking
};
/// Energy and gradient from one convolution.
Evaluation evaluate(const Model& m, const Field& u);

/// min over the fields of A(u) / int u^2 (fields with zero mass are skipped).
double coercivity_ratio(const Model& m, std::span<const Field> fields);

/// h^N sum f g.
double inner(const Field& f, const Field& g);

struct NehariProjection {
  double t;
  Field u;
  EnergyBreakdown e;
};
/// t = (A/D)^{1/(2q-2)}. Throws DomainError when A <= 0 (indefinite regime) or D = 0.
NehariProjection nehari_project(const Model& m, const Field& u);
NehariProjection nehari_project(const EnergyBreakdown& e, const Field& u);
/// <J'(u), u> = A - D.
double nehari_residual(const EnergyBreakdown& e);
/// max over t >= 0 of J(t u) by golden section on [1e-6, 1e3] (200 iterations).
double fibering_max(const EnergyBreakdown& e);

/// (N-2)/2 int|grad u|^2 + c0 N/2 int u^2 - (N-2)/2 D(u).
double pohozaev_residual(int dim, const EnergyBreakdown& e, double c0);
double pohozaev_residual(const Model& m, const Field& u, double c0);

/// |D(u + tau_a v) - D(u) - D(v)|; throws DomainError when the shifted v reaches the box boundary.
double brezis_lieb_defect(const RieszOperator& op, const Field& u, const Field& v, std::span<const int> shift,
                          double q);
/// Translate by whole cells without wrap-around; throws DomainError if support would wrap.
Field translate(const Field& f, std::span<const int> cells, double tol = 1e-14);

/// int x |grad u|^2 / int |grad u|^2.
Point barycenter(const Field& u);
/// Same with weight eta(|x|) x, eta(t) = 1 for t <= R and R/t beyond.
Point truncated_barycenter(const Field& u, double R);

/// int_{outside} u^2 / int u^2.
double mass_fraction_outside(const Field& u, const Eigen::ArrayXd& mask);

}  // namespace choquard
