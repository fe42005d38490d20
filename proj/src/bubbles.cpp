#include "choquard/bubbles.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "choquard/params.hpp"

namespace choquard {

namespace {

struct Weighted {
  Eigen::ArrayXd phi;  // Riesz potential of v^q
  double D;
};

Weighted nonlocal_parts(const RadialRieszTable& table, const RadialField& v, double q) {
  const Eigen::ArrayXd vq = v.values.abs().pow(q);
  Weighted w{radial_riesz_potential(table, *v.grid, vq), 0.0};
  w.D = (v.grid->weights() * vq * w.phi).sum();
  return w;
}

double residual_from(const RadialField& v, const Eigen::ArrayXd& phi, double q) {
  const RadialGrid& g = *v.grid;
  const Eigen::ArrayXd lap = g.laplacian(v.values);
  const Eigen::ArrayXd res = -lap - phi * v.values.abs().pow(q - 2.0) * v.values;
  return std::sqrt((g.weights() * res.square()).sum() / (g.weights() * lap.square()).sum());
}

}  // namespace

double tilde_factor(int dim, double mu, double sobolev) {
  const double n = dim;
  const double c = hls_constant(dim, mu);
  return std::pow(sobolev, (n - mu) * (2 - n) / (4 * (n - mu + 2))) * std::pow(c, (2 - n) / (2 * (n - mu + 2)));
}

std::shared_ptr<const RadialGrid> default_radial_grid(int dim, int intervals) {
  return std::make_shared<const RadialGrid>(dim, 1e6, intervals, 1e-2);
}

double sobolev_quotient(const RadialField& u) {
  const int n = u.grid->dim();
  const double crit = 2.0 * n / (n - 2.0);
  return grad_sq_integral(u) / std::pow(lp_norm(u, crit), 2.0);
}

double sobolev_constant(const RadialGrid& grid) {
  auto g = std::make_shared<const RadialGrid>(grid);
  const int n = grid.dim();
  return sobolev_quotient(sample_radial(g, [n](double r) { return bubble_U(n, r); }, "U"));
}

double shl_quotient(const RadialRieszTable& table, const RadialField& u) {
  const int n = u.grid->dim();
  const double mu = table.mu();
  const double q = derive_exponents(n, mu).two_mu_star;
  return grad_sq_integral(u) / std::pow(double_integral_D(table, u, q), (n - 2.0) / (2.0 * n - mu));
}

ShlValues shl_constant(int dim, double mu, const RadialGrid& grid) {
  const double s = sobolev_constant(grid);
  const double c = hls_constant(dim, mu);
  auto g = std::make_shared<const RadialGrid>(grid);
  const auto table = radial_riesz_table(dim, mu);
  const RadialField u = sample_radial(g, [dim](double r) { return bubble_U(dim, r); }, "U");
  return {s / std::pow(c, (dim - 2.0) / (2.0 * dim - mu)), shl_quotient(*table, u)};
}

double critical_level(int dim, double mu, double shl) {
  const ExponentSet e = derive_exponents(dim, mu);
  return e.level_coeff * std::pow(shl, (2.0 * dim - mu) / (dim + 2.0 - mu));
}

RadialField hls_extremal(std::shared_ptr<const RadialGrid> grid, double mu, double gamma) {
  const double p = -(2.0 * grid->dim() - mu) / 2.0;
  return sample_radial(std::move(grid), [&](double r) { return std::pow(gamma * gamma + r * r, p); }, "h");
}

double hls_ratio(const RadialRieszTable& table, const RadialField& h) {
  const int n = h.grid->dim();
  const double p = 2.0 * n / (2.0 * n - table.mu());
  const Eigen::ArrayXd phi = radial_riesz_potential(table, *h.grid, h.values);
  const double D = (h.grid->weights() * h.values * phi).sum();
  return D / std::pow(lp_norm(h, p), 2.0);
}

RadialField bubble_tilde(std::shared_ptr<const RadialGrid> grid, double mu, double sobolev) {
  const int n = grid->dim();
  const double k = tilde_factor(n, mu, sobolev);
  return sample_radial(std::move(grid), [&](double r) { return k * bubble_U(n, r); }, "U_tilde");
}

double choquard_residual(const RadialRieszTable& table, const RadialField& v) {
  const double q = derive_exponents(v.grid->dim(), table.mu()).two_mu_star;
  return residual_from(v, nonlocal_parts(table, v, q).phi, q);
}

ConstantSet compute_constants(int dim, double mu, int intervals) {
  ConstantSet cs;
  cs.N = dim;
  cs.mu = mu;
  const ExponentSet e = derive_exponents(dim, mu);
  const auto grid = default_radial_grid(dim, intervals);
  const auto table = radial_riesz_table(dim, mu);
  cs.grid_nodes = static_cast<int>(grid->size());
  cs.grid_r_max = grid->r_max();
  cs.grid_scale = grid->scale();

  cs.C_hls = hls_constant(dim, mu);
  cs.hls_ratio = hls_ratio(*table, hls_extremal(grid, mu));
  cs.S = sobolev_constant(*grid);
  cs.S_HL = cs.S / std::pow(cs.C_hls, (dim - 2.0) / (2.0 * dim - mu));
  const RadialField U = sample_radial(grid, [dim](double r) { return bubble_U(dim, r); }, "U");
  cs.S_HL_quotient = shl_quotient(*table, U);
  cs.c_star = critical_level(dim, mu, cs.S_HL);

  const RadialField tilde = bubble_tilde(grid, mu, cs.S);
  const Weighted nl = nonlocal_parts(*table, tilde, e.two_mu_star);
  cs.grad_tilde = grad_sq_integral(tilde);
  cs.D_tilde = nl.D;
  cs.tilde_target = std::pow(cs.S_HL, (2.0 * dim - mu) / (dim - mu + 2.0));
  cs.J_tilde = 0.5 * cs.grad_tilde - cs.D_tilde / (2.0 * e.two_mu_star);
  cs.residual = residual_from(tilde, nl.phi, e.two_mu_star);
  cs.pohozaev = std::abs(cs.grad_tilde - cs.D_tilde) / cs.grad_tilde;
  return cs;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two points");
  Eigen::MatrixXd A(x.size(), 2);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    A(i, 0) = std::log(x[i]);
    A(i, 1) = 1.0;
    b[i] = std::log(std::abs(y[i]));
  }
  return A.colPivHouseholderQr().solve(b)[0];
}

AsymptoticTable bubble_asymptotics(int dim, double mu, const std::vector<double>& eps_list, double delta,
                                   int intervals, bool with_nonlocal) {
  if (!(delta > 0.0)) throw DomainError("cutoff radius must be positive");
  const ExponentSet e = derive_exponents(dim, mu);
  const auto grid = default_radial_grid(dim, intervals);
  const double s = sobolev_constant(*grid);
  const double c = hls_constant(dim, mu);
  const double shl = s / std::pow(c, (dim - 2.0) / (2.0 * dim - mu));

  AsymptoticTable t;
  t.N = dim;
  t.mu = mu;
  t.delta = delta;
  t.target = std::pow(c, (dim - 2.0) / (2.0 * dim - mu) * dim / 2.0) * std::pow(shl, dim / 2.0);
  std::shared_ptr<const RadialRieszTable> table;
  if (with_nonlocal) table = radial_riesz_table(dim, mu);

  std::vector<double> sorted = eps_list;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double eps : sorted) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    AsymptoticRow row{};
    row.eps = eps;
    const RadialField u =
        sample_radial(grid, [&](double r) { return cutoff_bubble(dim, eps, delta, r); }, "u_eps");
    row.grad_sq = grad_sq_integral(u);
    row.D = with_nonlocal ? double_integral_D(*table, u, e.two_mu_star) : std::nan("");
    row.l2_sq = integrate(u.with_values(u.values.square()));
    row.remainder = row.grad_sq - t.target;
    row.l2_ratio = dim == 4 ? row.l2_sq / (eps * eps * std::abs(std::log(eps))) : row.l2_sq / (eps * eps);
    row.reliable = true;
    if (eps > delta / 4.0) {
      row.reliable = false;
      row.note = "no scale separation (eps > delta/4)";
    } else if (grid->local_spacing(eps) > eps / 20.0) {
      row.reliable = false;
      row.note = "eps not resolved by the radial grid";
    }
    t.rows.push_back(row);
  }

  std::vector<double> xs, ys, ratios;
  for (auto it = t.rows.rbegin(); it != t.rows.rend() && xs.size() < 3; ++it) {
    if (!it->reliable) continue;
    xs.push_back(it->eps);
    ys.push_back(it->remainder);
    ratios.push_back(it->l2_ratio);
  }
  t.remainder_exponent = xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan("");
  t.l2_ratio_variation = ratios.size() >= 2
                             ? std::abs(ratios[0] - ratios[1]) / std::max(std::abs(ratios[0]), std::abs(ratios[1]))
                             : std::nan("");
  return t;
}

}  // namespace choquard
