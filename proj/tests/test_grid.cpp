#include <numbers>
#include <random>

#include "doctest.h"

#include "choquard/fourier.hpp"
#include "choquard/grid.hpp"
#include "choquard/snapshot.hpp"

using namespace choquard;
using std::numbers::pi;

namespace {

Field smooth_random(std::shared_ptr<const TensorGrid> g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g);
  // a handful of random Gaussians keeps the field smooth and periodic to rounding
  for (int k = 0; k < 4; ++k) {
    std::vector<double> c(g->dim());
    for (auto& x : c) x = 0.3 * nd(rng);
    const double a = nd(rng);
    f.values += sample(g, [&](std::span<const double> x) {
                  double r2 = 0.0;
                  for (int i = 0; i < g->dim(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
                  return a * std::exp(-4.0 * r2);
                }).values;
  }
  return f;
}

}  // namespace

TEST_CASE("radial integration of 1 over the unit 4-ball gives its volume") {
  auto g = std::make_shared<const RadialGrid>(4, 1.0, 4000);
  const RadialField one = sample_radial(g, [](double) { return 1.0; });
  CHECK(integrate(one) == doctest::Approx(pi * pi / 2).epsilon(1e-8));
  CHECK(integrate(RadialField::zeros(g)) == 0.0);
}

TEST_CASE("radial quadrature is exact enough for low-degree polynomials") {
  auto g = std::make_shared<const RadialGrid>(4, 1.0, 4000);
  // int_B r^k dx = |S^3| / (k + 4)
  for (int k = 0; k <= 3; ++k) {
    const RadialField f = sample_radial(g, [k](double r) { return std::pow(r, k); });
    CHECK(integrate(f) == doctest::Approx(2 * pi * pi / (k + 4)).epsilon(1e-8));
  }
}

TEST_CASE("Gaussian on a tensor grid integrates to pi^2 in four dimensions") {
  auto g = std::make_shared<const TensorGrid>(4, 32, 8.0);
  const Field f = sample(g, [](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return std::exp(-r2);
  });
  CHECK(integrate(f) == doctest::Approx(pi * pi).epsilon(1e-10));
}

TEST_CASE("Dirichlet energy of one Fourier mode") {
  const double L = 2.0;
  auto g = std::make_shared<const TensorGrid>(3, 16, L);
  const Field f = sample(g, [&](std::span<const double> x) { return std::sin(pi * x[0] / L); });
  const double expected = (pi / L) * (pi / L) / 2 * std::pow(2 * L, 3);
  CHECK(grad_sq_integral(f) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("Dirichlet energy vanishes on constants and is positive otherwise") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  Field c = Field::zeros(g);
  c.values.setConstant(3.7);
  CHECK(std::abs(grad_sq_integral(c)) < 1e-12);
  for (unsigned s = 0; s < 5; ++s) CHECK(grad_sq_integral(smooth_random(g, s)) > 0.0);
}

TEST_CASE("Parseval and the transform round trip") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g);
  for (auto& v : f.values) v = nd(rng);
  const Spectrum s = fourier_forward(f);
  const double direct = integrate(f.with_values(f.values.square()));
  CHECK(std::abs(spectral_l2_sq(s) - direct) / direct < 1e-10);
  const Field back = fourier_backward(s);
  CHECK(((back.values - f.values).abs().maxCoeff() / f.values.abs().maxCoeff()) < 1e-12);

  const Field smooth = smooth_random(g, 3);
  const double ds = integrate(smooth.with_values(smooth.values.square()));
  CHECK(std::abs(spectral_l2_sq(fourier_forward(smooth)) - ds) / ds < 1e-10);
}

TEST_CASE("delta at the origin has a flat spectrum") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 1.0);
  Field d = Field::zeros(g);
  d.values[g->origin_index()] = 1.0;
  const Spectrum s = fourier_forward(d);
  const Eigen::ArrayXd mag = s.coeffs.abs();
  CHECK(mag.maxCoeff() - mag.minCoeff() < 1e-14);
}

TEST_CASE("shift theorem on a random field") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 1.0);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g);
  for (auto& v : f.values) v = nd(rng);
  const std::array<int, 3> shift{1, 2, 3};
  const Spectrum a = fourier_forward(f);
  const Spectrum b = fourier_forward(shift_cells(f, shift));
  // modulation by exp(-2 pi i m.s / n) on the half-complex layout
  const int n = g->n(), nh = n / 2 + 1;
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < nh; ++k) {
        const Eigen::Index idx = (static_cast<Eigen::Index>(i) * n + j) * nh + k;
        const double phase = -2 * pi * (i * shift[0] + j * shift[1] + k * shift[2]) / n;
        const std::complex<double> expect = a.coeffs[idx] * std::polar(1.0, phase);
        err = std::max(err, std::abs(expect - b.coeffs[idx]));
      }
  CHECK(err < 1e-12 * a.coeffs.abs().maxCoeff());
}

TEST_CASE("grid construction errors") {
  CHECK_THROWS_AS(TensorGrid(3, 15, 1.0), DomainError);
  CHECK_THROWS_AS(TensorGrid(6, 16, 1.0), DomainError);
  CHECK_THROWS_AS(TensorGrid(3, 16, -1.0), DomainError);
  auto g = std::make_shared<const TensorGrid>(3, 16, 1.0);
  Field f = Field::zeros(g);
  f.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(integrate(f), NonFiniteError);
}

TEST_CASE("snapshots round trip bit for bit") {
  auto g = std::make_shared<const TensorGrid>(3, 16, 1.5);
  Field f = smooth_random(g, 5);
  f.label = "probe";
  const auto dir = std::filesystem::temp_directory_path() / "choquard_snapshot_test";
  std::filesystem::create_directories(dir);
  write_snapshot(dir / "f", f, "0123456789abcdef");
  const Field back = read_snapshot(dir / "f");
  CHECK(back.label == "probe");
  CHECK(*back.grid == *g);
  CHECK(std::memcmp(back.values.data(), f.values.data(), sizeof(double) * f.size()) == 0);

  auto rg = std::make_shared<const RadialGrid>(4, 3.0, 200);
  const RadialField r = sample_radial(rg, [](double x) { return std::exp(-x) / 3.0; }, "radial");
  write_snapshot(dir / "r", r);
  const RadialField rb = read_radial_snapshot(dir / "r");
  CHECK(*rb.grid == *rg);
  CHECK(std::memcmp(rb.values.data(), r.values.data(), sizeof(double) * r.size()) == 0);
  std::filesystem::remove_all(dir);
}
