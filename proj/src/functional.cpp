#include "choquard/functional.hpp"

#include <numbers>

#include "choquard/fourier.hpp"

namespace choquard {

Model Model::make(const ProblemParams& p, std::shared_ptr<const TensorGrid> g, const Potential* V,
                  std::shared_ptr<const RieszOperator> riesz) {
  p.validate();
  if (g->dim() != p.N) throw GridMismatch("grid dimension differs from N");
  Model m;
  m.params = p;
  m.grid = g;
  m.V = V ? sample_potential(*V, g).values : Eigen::ArrayXd::Zero(g->size());
  if (riesz && (riesz->mu() != p.mu || *riesz->grid() != *g)) throw GridMismatch("Riesz operator does not match");
  m.riesz = riesz ? std::move(riesz) : std::make_shared<const RieszOperator>(g, p.mu);
  m.q = p.q();
  return m;
}

Model Model::with_params(const ProblemParams& p) const {
  p.validate();
  if (p.N != params.N || p.mu != params.mu) throw DomainError("with_params keeps N and mu");
  Model m = *this;
  m.params = p;
  return m;
}

Model Model::with_potential(Eigen::ArrayXd v) const {
  if (v.size() != grid->size()) throw GridMismatch("potential size does not match the grid");
  Model m = *this;
  m.V = std::move(v);
  return m;
}

Model Model::limit_problem(Eigen::ArrayXd mask_values, double beta) const {
  if (mask_values.size() != grid->size()) throw GridMismatch("mask size does not match the grid");
  Model m = *this;
  m.params.lambda = 0.0;
  m.params.beta = beta;
  m.params.validate();
  m.V = Eigen::ArrayXd::Zero(grid->size());
  m.mask = std::move(mask_values);
  return m;
}

EnergyBreakdown EnergyBreakdown::scaled(double t) const {
  EnergyBreakdown s = *this;
  const double t2 = t * t;
  s.dirichlet *= t2;
  s.potential *= t2;
  s.mass *= t2;
  s.A *= t2;
  s.nonlocal *= std::pow(t, 2.0 * q);
  s.J = 0.5 * s.A - s.nonlocal / (2.0 * q);
  return s;
}

namespace {

void check_field(const Model& m, const Field& u) {
  if (!u.grid || (u.grid != m.grid && *u.grid != *m.grid)) throw GridMismatch("field is not on the model grid");
  require_finite(u.values, "energy");
}

EnergyBreakdown assemble(const Model& m, const Field& u, double dirichlet, double nonlocal) {
  const double hN = m.grid->cell_volume();
  EnergyBreakdown e;
  e.q = m.q;
  e.dirichlet = dirichlet;
  e.mass = hN * u.values.square().sum();
  e.potential = m.params.lambda == 0.0 ? 0.0 : m.params.lambda * hN * (m.V * u.values.square()).sum();
  e.nonlocal = nonlocal;
  e.A = e.dirichlet + e.potential - m.params.beta * e.mass;
  e.J = 0.5 * e.A - e.nonlocal / (2.0 * e.q);
  return e;
}

}  // namespace

EnergyBreakdown energy(const Model& m, const Field& u) {
  check_field(m, u);
  const Eigen::ArrayXd uq = (m.dealias ? band_limit(u).values : u.values).abs().pow(m.q);
  const double D = m.grid->cell_volume() * (uq * m.riesz->apply(uq)).sum();
  return assemble(m, u, grad_sq_integral(u), D);
}

Evaluation evaluate(const Model& m, const Field& u) {
  check_field(m, u);
  const TensorGrid& g = *m.grid;
  Spectrum s = fourier_forward(u);
  const Eigen::ArrayXd& k2 = wave_number_sq(g);
  const double dirichlet = g.cell_volume() / static_cast<double>(g.size()) *
                           (spectrum_multiplicity(g) * k2 * s.coeffs.abs2()).sum();
  s.coeffs *= k2;
  Eigen::ArrayXd minus_lap = fourier_backward(s).values;

  const Eigen::ArrayXd ub = m.dealias ? band_limit(u).values : u.values;
  const Eigen::ArrayXd absu = ub.abs();
  const Eigen::ArrayXd uq = absu.pow(m.q);
  Evaluation ev;
  ev.phi = m.riesz->apply(uq);
  const double D = g.cell_volume() * (uq * ev.phi).sum();
  ev.e = assemble(m, u, dirichlet, D);
  Eigen::ArrayXd nl = ev.phi * absu.pow(m.q - 2.0) * ub;
  if (m.dealias) nl = band_limit(Field(m.grid, std::move(nl))).values;
  Eigen::ArrayXd gvals = minus_lap + (m.params.lambda * m.V - m.params.beta) * u.values - nl;
  ev.nonlinear = std::move(nl);
  if (m.mask) gvals *= *m.mask;
  ev.grad = Field(m.grid, std::move(gvals), "gradient");
  return ev;
}

Field gradient(const Model& m, const Field& u) { return evaluate(m, u).grad; }

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return f.grid->cell_volume() * (f.values * g.values).sum();
}

double nehari_residual(const EnergyBreakdown& e) { return e.A - e.nonlocal; }

NehariProjection nehari_project(const EnergyBreakdown& e, const Field& u) {
  if (!(e.nonlocal > 0.0)) throw DomainError("Nehari projection of the zero field");
  if (!(e.A > 0.0)) throw DomainError("quadratic form is not positive: outside the definite regime");
  const double t = std::pow(e.A / e.nonlocal, 1.0 / (2.0 * e.q - 2.0));
  return {t, u.with_values(t * u.values), e.scaled(t)};
}

NehariProjection nehari_project(const Model& m, const Field& u) { return nehari_project(energy(m, u), u); }

double fibering_max(const EnergyBreakdown& e) {
  auto j = [&](double t) { return 0.5 * t * t * e.A - std::pow(t, 2.0 * e.q) * e.nonlocal / (2.0 * e.q); };
  // golden section on log t keeps the bracket ratio-uniform
  double a = std::log(1e-6), b = std::log(1e3);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = j(std::exp(c)), fd = j(std::exp(d));
  for (int it = 0; it < 200; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = j(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = j(std::exp(d));
    }
  }
  return j(std::exp(0.5 * (a + b)));
}

double pohozaev_residual(int dim, const EnergyBreakdown& e, double c0) {
  return 0.5 * (dim - 2) * e.dirichlet + c0 * 0.5 * dim * e.mass - 0.5 * (dim - 2) * e.nonlocal;
}

double pohozaev_residual(const Model& m, const Field& u, double c0) {
  return pohozaev_residual(m.params.N, energy(m, u), c0);
}

Field translate(const Field& f, std::span<const int> cells, double tol) {
  const TensorGrid& g = *f.grid;
  if (static_cast<int>(cells.size()) != g.dim()) throw GridMismatch("shift has wrong dimension");
  const double cut = tol * f.values.abs().maxCoeff();
  std::array<int, kMaxTensorDim> idx{};
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (std::abs(f.values[k]) <= cut) continue;
    g.multi_index(k, idx);
    for (int a = 0; a < g.dim(); ++a) {
      const int j = idx[a] + cells[a];
      if (j < 1 || j >= g.n() - 1) throw DomainError("translated field reaches the box boundary");
    }
  }
  return shift_cells(f, cells);
}

double brezis_lieb_defect(const RieszOperator& op, const Field& u, const Field& v, std::span<const int> shift,
                          double q) {
  require_same_grid(u, v);
  const Field tv = translate(v, shift);
  const Field sum = u.with_values(u.values + tv.values);
  return std::abs(double_integral_D(op, sum, q) - double_integral_D(op, u, q) - double_integral_D(op, v, q));
}

namespace {

Point weighted_barycenter(const Field& u, const std::function<double(double)>& eta) {
  const TensorGrid& g = *u.grid;
  const auto grads = spectral_gradient(u);
  Eigen::ArrayXd density = Eigen::ArrayXd::Zero(g.size());
  for (const Field& d : grads) density += d.values.square();
  const double total = density.sum();
  if (!(total > 0.0)) throw DomainError("barycenter of a field without gradient");
  const Eigen::ArrayXd r = g.radii();
  const Eigen::ArrayXd w = density * r.unaryExpr(eta);
  Point c(g.dim());
  for (int a = 0; a < g.dim(); ++a) c[a] = (w * g.axis_coordinates(a)).sum() / total;
  return c;
}

}  // namespace

Point barycenter(const Field& u) {
  return weighted_barycenter(u, [](double) { return 1.0; });
}

Point truncated_barycenter(const Field& u, double R) {
  if (!(R > 0.0)) throw DomainError("truncation radius must be positive");
  return weighted_barycenter(u, [R](double t) { return t <= R ? 1.0 : R / t; });
}

double coercivity_ratio(const Model& m, std::span<const Field> fields) {
  const double hN = m.grid->cell_volume();
  double best = std::numeric_limits<double>::infinity();
  for (const Field& u : fields) {
    if (!u.grid || (u.grid != m.grid && *u.grid != *m.grid)) throw GridMismatch("field is not on the model grid");
    const double mass = hN * u.values.square().sum();
    if (!(mass > 0.0)) continue;
    const double A = grad_sq_integral(u) + hN * ((m.params.lambda * m.V - m.params.beta) * u.values.square()).sum();
    best = std::min(best, A / mass);
  }
  if (!std::isfinite(best)) throw DomainError("coercivity ratio needs a field with positive mass");
  return best;
}

double mass_fraction_outside(const Field& u, const Eigen::ArrayXd& mask) {
  const Eigen::ArrayXd u2 = u.values.square();
  const double total = u2.sum();
  if (!(total > 0.0)) throw DomainError("mass fraction of the zero field");
  return ((1.0 - mask) * u2).sum() / total;
}

}  // namespace choquard
