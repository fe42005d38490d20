#include <random>

#include "doctest.h"

#include "choquard/params.hpp"

using namespace choquard;

TEST_CASE("exponents for (4, 2) and (5, 1)") {
  const ExponentSet a = derive_exponents(4, 2.0);
  CHECK(a.two_mu_star == 3.0);
  CHECK(a.nehari_exp == 4.0);
  CHECK(a.level_coeff == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const ExponentSet b = derive_exponents(5, 1.0);
  CHECK(b.two_mu_star == 3.0);
  CHECK(b.nehari_exp == 4.0);
}

TEST_CASE("exponent identities on random (N, mu)") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> dim(3, 7);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  for (int k = 0; k < 50; ++k) {
    const int N = dim(rng);
    const double mu = frac(rng) * N;
    const ExponentSet e = derive_exponents(N, mu);
    CHECK(e.nehari_exp == doctest::Approx(2.0 * (N - mu + 2) / (N - 2)).epsilon(1e-14));
    CHECK(e.level_coeff == doctest::Approx((e.two_mu_star - 1) / (2 * e.two_mu_star)).epsilon(1e-14));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(derive_exponents(2, 1.0), DomainError);
  CHECK_THROWS_AS(derive_exponents(4, 0.0), DomainError);
  CHECK_THROWS_AS(derive_exponents(4, 4.0), DomainError);
  ProblemParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.beta = -0.1;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.N = 5;
  p.mu = 4.5;  // 2 mu* = 5.5 / 3 < 2
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK(to_string(well_kind_from_string("annulus")) == "annulus_well");
  CHECK(well_kind_from_string(to_string(WellKind::smooth_ramp)) == WellKind::smooth_ramp);
  CHECK_THROWS_AS(well_kind_from_string("torus"), DomainError);
}

TEST_CASE("ball well in a box of half width 4 passes every check") {
  auto g = std::make_shared<const TensorGrid>(4, 16, 4.0);
  const ValidationReport r = validate_potential(Potential::ball_well(1.0), g);
  CHECK(r.zero_set_ok);
  CHECK(r.sublevel_ok);
  CHECK(r.shell_ok);
  CHECK(r.min_value == 0.0);
  CHECK(r.origin_in_zero_set);
  CHECK(r.shell_min == doctest::Approx(2.0));
}

TEST_CASE("a vanishing potential fails the zero set check") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const ValidationReport r = validate_potential(Field::zeros(g), 1.0);
  CHECK_FALSE(r.zero_set_ok);
}

TEST_CASE("negative or nowhere-vanishing potentials are rejected") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  Field f = Field::zeros(g);
  f.values.setConstant(1.0);
  CHECK_THROWS_AS(validate_potential(f, 1.0), DomainError);
  f.values.setZero();
  f.values[0] = -1.0;
  CHECK_THROWS_AS(validate_potential(f, 1.0), DomainError);
}

TEST_CASE("annulus zero set misses the origin") {
  auto g = std::make_shared<const TensorGrid>(4, 16, 2.5);
  Potential a = Potential::annulus_well(0.5, 1.5);
  const double origin[4] = {0, 0, 0, 0};
  CHECK(a(origin) > 0.0);
  a.origin_override = false;
  const ValidationReport strict = validate_potential(a, g);
  CHECK_FALSE(strict.zero_set_ok);
  CHECK_FALSE(strict.origin_in_zero_set);
  bool noted = false;
  for (const auto& n : strict.notes) noted = noted || n.find("origin not in zero set") != std::string::npos;
  CHECK(noted);
  a.origin_override = true;
  CHECK(validate_potential(a, g).zero_set_ok);
}

TEST_CASE("default wells pass the zero set and sublevel checks; the unbounded ramp passes the shell check") {
  auto g = std::make_shared<const TensorGrid>(4, 16, 3.0);
  for (const Potential& V : {Potential::ball_well(), Potential::box_well(), Potential::annulus_well(),
                             Potential::smooth_ramp_well()}) {
    const ValidationReport r = validate_potential(V, g);
    CHECK(r.zero_set_ok);
    CHECK(r.sublevel_ok);
  }
  CHECK(validate_potential(Potential::smooth_ramp_well(), g).shell_ok);
}

TEST_CASE("potential shape") {
  const Potential V = Potential::ball_well(1.0);
  const double inside[3] = {0.5, 0.0, 0.0};
  const double mid[3] = {1.25, 0.0, 0.0};
  const double far[3] = {3.0, 0.0, 0.0};
  CHECK(V(inside) == 0.0);
  CHECK(V(mid) == doctest::Approx(1.0));  // half way up the ramp: cap * 1/2
  CHECK(V(far) == doctest::Approx(2.0));
  const Potential R = Potential::smooth_ramp_well(1.0);
  CHECK(R(far) == doctest::Approx(16.0));
}
