#include <random>

#include "doctest.h"

#include "choquard/bubbles.hpp"
#include "choquard/functional.hpp"
#include "choquard/spectra.hpp"

using namespace choquard;

namespace {

Field bump(std::shared_ptr<const TensorGrid> g, const std::vector<double>& c, double eps) {
  return sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < g->dim(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    return cutoff_bubble(g->dim(), eps, 2.0 * eps, std::sqrt(r2));
  });
}

Field random_smooth(std::shared_ptr<const TensorGrid> g, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> c(g->dim());
    for (auto& x : c) x = 0.3 * nd(rng);
    const double a = nd(rng);
    f.values += sample(g, [&](std::span<const double> x) {
                  double r2 = 0.0;
                  for (int i = 0; i < g->dim(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
                  return a * std::exp(-3.0 * r2);
                }).values;
  }
  return f;
}

Model well_model(int n = 16, double lambda = 10.0, double beta = 2.0) {
  auto g = std::make_shared<const TensorGrid>(3, n, 2.0);
  ProblemParams p;
  p.N = 3;
  p.mu = 1.0;
  p.lambda = lambda;
  p.beta = beta;
  const Potential V = Potential::ball_well(1.0);
  return Model::make(p, g, &V);
}

}  // namespace

TEST_CASE("energy parts of the zero field") {
  const Model m = well_model();
  const EnergyBreakdown e = energy(m, Field::zeros(m.grid));
  CHECK(e.dirichlet == 0.0);
  CHECK(e.potential == 0.0);
  CHECK(e.mass == 0.0);
  CHECK(e.nonlocal == 0.0);
  CHECK(e.J == 0.0);
  CHECK(gradient(m, Field::zeros(m.grid)).values.abs().maxCoeff() == 0.0);
  CHECK(pohozaev_residual(m, Field::zeros(m.grid), 1.0) == 0.0);
}

TEST_CASE("J is assembled exactly from its parts") {
  const Model m = well_model();
  std::mt19937 rng(1);
  const EnergyBreakdown e = energy(m, random_smooth(m.grid, rng));
  CHECK(e.A == e.dirichlet + e.potential - m.params.beta * e.mass);
  CHECK(e.J == 0.5 * e.A - e.nonlocal / (2.0 * e.q));
}

TEST_CASE("doubling u scales the parts by 4 and 2^{2q}") {
  ProblemParams p;
  p.N = 3;
  p.mu = 1.0;
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const Model m = Model::make(p, g);
  std::mt19937 rng(2);
  const Field u = random_smooth(g, rng);
  const EnergyBreakdown a = energy(m, u), b = energy(m, u.with_values(2.0 * u.values));
  CHECK(b.dirichlet == doctest::Approx(4.0 * a.dirichlet).epsilon(1e-13));
  CHECK(b.nonlocal == doctest::Approx(std::pow(2.0, 2.0 * m.q) * a.nonlocal).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences on 20 random fields") {
  const Model m = well_model();
  std::mt19937 rng(3);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Field u = random_smooth(m.grid, rng);
    const Field phi = random_smooth(m.grid, rng);
    const double t = 1e-5;
    const double fd = (energy(m, u.with_values(u.values + t * phi.values)).J -
                       energy(m, u.with_values(u.values - t * phi.values)).J) /
                      (2 * t);
    const double an = inner(gradient(m, u), phi);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient with a mask is the masked residual") {
  const Model base = well_model();
  const Eigen::ArrayXd mask = zero_set_mask(Potential::ball_well(1.0), base.grid).values;
  const Model m = base.limit_problem(mask, 1.0);
  std::mt19937 rng(4);
  const Field u = random_smooth(m.grid, rng);
  const Field g = gradient(m, u.with_values(u.values * mask));
  CHECK(((1.0 - mask) * g.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("Nehari projection") {
  const Model m = well_model();
  std::mt19937 rng(5);
  const Field u = bump(m.grid, {0.1, 0.0, -0.1}, 0.3);
  const NehariProjection p = nehari_project(m, u);
  const EnergyBreakdown e = energy(m, p.u);
  CHECK(std::abs(nehari_residual(e)) / e.A < 1e-10);
  CHECK(e.J == doctest::Approx(derive_exponents(3, 1.0).level_coeff * p.t * p.t * energy(m, u).A).epsilon(1e-10));
  // homogeneity: t(2u) = t(u) / 2
  CHECK(nehari_project(m, u.with_values(2.0 * u.values)).t == doctest::Approx(0.5 * p.t).epsilon(1e-12));
  // A = D gives t = 1
  EnergyBreakdown eq;
  eq.A = eq.nonlocal = 2.5;
  eq.q = 3.0;
  CHECK(nehari_project(eq, u).t == 1.0);
  CHECK_THROWS_AS(nehari_project(m, Field::zeros(m.grid)), DomainError);
}

TEST_CASE("fibering maximum equals J on the Nehari set") {
  const Model m = well_model();
  std::mt19937 rng(6);
  for (int k = 0; k < 5; ++k) {
    Field u = random_smooth(m.grid, rng);
    u.values = u.values.abs();
    const EnergyBreakdown e = energy(m, u);
    REQUIRE(e.A > 0.0);
    const NehariProjection p = nehari_project(e, u);
    CHECK(std::abs(fibering_max(e) - p.e.J) / p.e.J < 1e-8);
  }
}

TEST_CASE("indefinite quadratic form blocks the projection") {
  const Model m = well_model(16, 0.0, 50.0);
  const Field u = bump(m.grid, {0.0, 0.0, 0.0}, 0.5);
  CHECK_THROWS_AS(nehari_project(m, u), DomainError);
}

TEST_CASE("Pohozaev residual: the mass term enters with N/2") {
  ProblemParams p;
  p.N = 3;
  p.mu = 1.0;
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const Model m = Model::make(p, g);
  const Field u = bump(g, {0, 0, 0}, 0.3);
  const EnergyBreakdown e = energy(m, u);
  CHECK(pohozaev_residual(m, u, 1.0) - pohozaev_residual(m, u, 0.0) == doctest::Approx(1.5 * e.mass).epsilon(1e-12));
}

TEST_CASE("D is invariant under whole-cell translations") {
  ProblemParams p;
  p.N = 3;
  p.mu = 1.0;
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const Model m = Model::make(p, g);
  const Field u = bump(g, {0.0, 0.25, 0.0}, 0.2);
  const std::array<int, 3> s{3, -2, 1};
  const double D0 = double_integral_D(*m.riesz, u, m.q);
  const double D1 = double_integral_D(*m.riesz, translate(u, s), m.q);
  CHECK(std::abs(D1 - D0) / D0 < 1e-10);
  const double Dc = double_integral_D(*m.riesz, u.with_values(-1.7 * u.values), m.q);
  CHECK(std::abs(Dc / (std::pow(1.7, 2 * m.q) * D0) - 1.0) < 1e-10);
  const std::array<int, 3> far{12, 0, 0};
  CHECK_THROWS_AS(translate(u, far), DomainError);
}

TEST_CASE("Brezis-Lieb defect") {
  auto g = std::make_shared<const TensorGrid>(3, 64, 4.0);
  RieszOperator op(g, 1.0);
  const double q = derive_exponents(3, 1.0).two_mu_star;
  // cutoff bubble with eps = 0.05: support radius 4 eps = 0.2
  const Field u = bump(g, {-2.5, 0.0, 0.0}, 0.05);
  const std::array<int, 3> none{0, 0, 0};
  CHECK(brezis_lieb_defect(op, u, Field::zeros(g), none, q) == 0.0);
  const double D = double_integral_D(op, u, q);
  CHECK(brezis_lieb_defect(op, u, u, none, q) == doctest::Approx((std::pow(2.0, 2 * q) - 2.0) * D).epsilon(1e-12));
  // separations of 8, 12 and 16 support radii (h = 0.125); disjoint supports leave only the cross
  // interaction, which falls off like 1 / separation
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0;
  for (int cells : {13, 19, 26}) {
    const std::array<int, 3> s{cells, 0, 0};
    const double d = brezis_lieb_defect(op, u, u, s, q);
    MESSAGE("shift " << cells << ": defect / D = " << d / D);
    CHECK(d < prev);
    CHECK(d / D < 0.1);
    if (cells == 13) first = d * cells;
    CHECK(d * cells == doctest::Approx(first).epsilon(1e-3));
    prev = d;
  }
}

TEST_CASE("barycenters") {
  auto g = std::make_shared<const TensorGrid>(3, 32, 2.0);
  const Field sym = bump(g, {0, 0, 0}, 0.2);
  CHECK(barycenter(sym).norm() < 1e-12);
  const std::vector<double> a{0.5, -0.25, 0.25};
  const Field moved = bump(g, a, 0.15);
  const Point b = barycenter(moved);
  const Point bc = truncated_barycenter(moved, 1.5);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(b[i] - a[i]) < g->spacing());
    CHECK(std::abs(bc[i] - a[i]) < g->spacing());
  }
  // centred at |a| = 2R the truncated version is pulled inward
  const Field outer = bump(g, {1.0, 0.0, 0.0}, 0.1);
  CHECK(truncated_barycenter(outer, 0.5).norm() < barycenter(outer).norm());
  CHECK_THROWS_AS(barycenter(Field::zeros(g)), DomainError);
}

TEST_CASE("mass fraction outside a mask") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const Field u = bump(g, {0, 0, 0}, 0.2);
  const Eigen::ArrayXd all = Eigen::ArrayXd::Ones(g->size());
  CHECK(mass_fraction_outside(u, all) == 0.0);
  CHECK(mass_fraction_outside(u, Eigen::ArrayXd::Zero(g->size())) == doctest::Approx(1.0));
}

TEST_CASE("energy rejects foreign grids and non-finite data") {
  const Model m = well_model();
  auto g2 = std::make_shared<const TensorGrid>(3, 16, 3.0);
  CHECK_THROWS_AS(energy(m, Field::zeros(g2)), GridMismatch);
  Field bad = Field::zeros(m.grid);
  bad.values[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(energy(m, bad), NonFiniteError);
}

TEST_CASE("coercivity ratio over random fields is positive and grows with lambda") {
  auto g = std::make_shared<const TensorGrid>(4, 16, 2.0);
  const Potential V = Potential::ball_well(1.0);
  const double beta1 = dirichlet_eigs(g, zero_set_mask(V, g).values, 1).values[0];
  std::mt19937 rng(8);
  std::normal_distribution<double> nd;
  std::vector<Field> fields;
  for (int k = 0; k < 200; ++k) {
    Field f = random_smooth(g, rng);
    // add a rough component so that not every field is a smooth bump
    for (auto& v : f.values) v += 0.1 * nd(rng);
    f.values /= std::sqrt(inner(f, f));
    fields.push_back(std::move(f));
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (double lambda : {1e2, 1e3, 1e4}) {
    ProblemParams p;
    p.lambda = lambda;
    p.beta = 0.5 * beta1;
    const double r = coercivity_ratio(Model::make(p, g, &V), fields);
    MESSAGE("lambda " << lambda << ": inf A / |u|^2 = " << r);
    CHECK(r > 0.0);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK_THROWS_AS(coercivity_ratio(well_model(), std::vector<Field>{Field::zeros(well_model().grid)}), DomainError);
}
