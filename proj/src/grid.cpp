#include "choquard/grid.hpp"

#include <numbers>

#include "choquard/fourier.hpp"

namespace choquard {

TensorGrid::TensorGrid(int dim, int n, double half_width, std::int64_t point_budget)
    : dim_(dim), n_(n), half_width_(half_width) {
  if (dim < 1 || dim > kMaxTensorDim) throw DomainError("tensor grid dimension must be in [1, 5]");
  if (n < 16 || (n & (n - 1)) != 0) throw DomainError("points per axis must be a power of two >= 16");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("box half-width must be positive");
  std::int64_t total = 1;
  for (int a = 0; a < dim; ++a) {
    total *= n;
    if (total > point_budget) throw DomainError("tensor grid exceeds the configured point budget");
  }
  size_ = static_cast<Eigen::Index>(total);
}

double TensorGrid::cell_volume() const { return std::pow(spacing(), dim_); }

int TensorGrid::nearest_index(double x) const {
  const int i = static_cast<int>(std::lround((x + half_width_) / spacing()));
  return std::clamp(i, 0, n_ - 1);
}

void TensorGrid::multi_index(Eigen::Index flat, std::array<int, kMaxTensorDim>& idx) const {
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
}

Eigen::Index TensorGrid::flat_index(std::span<const int> idx) const {
  Eigen::Index k = 0;
  for (int a = 0; a < dim_; ++a) k = k * n_ + ((idx[a] % n_) + n_) % n_;
  return k;
}

void TensorGrid::point(Eigen::Index flat, double* x) const {
  const double h = spacing();
  for (int a = dim_ - 1; a >= 0; --a) {
    x[a] = -half_width_ + static_cast<double>(flat % n_) * h;
    flat /= n_;
  }
}

Point TensorGrid::point(Eigen::Index flat) const {
  Point x(dim_);
  point(flat, x.data());
  return x;
}

Eigen::Index TensorGrid::origin_index() const {
  std::array<int, kMaxTensorDim> idx{};
  idx.fill(n_ / 2);
  return flat_index(std::span<const int>(idx.data(), dim_));
}

Eigen::ArrayXd TensorGrid::radii() const {
  Eigen::ArrayXd r2 = Eigen::ArrayXd::Zero(size_);
  for (int a = 0; a < dim_; ++a) r2 += axis_coordinates(a).square();
  return r2.sqrt();
}

Eigen::ArrayXd TensorGrid::axis_coordinates(int axis) const {
  Eigen::ArrayXd x(size_);
  Eigen::Index stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= n_;
  const double h = spacing();
  for (Eigen::Index k = 0; k < size_; ++k) x[k] = -half_width_ + static_cast<double>((k / stride) % n_) * h;
  return x;
}

Eigen::Array<bool, Eigen::Dynamic, 1> TensorGrid::boundary_shell(int width) const {
  Eigen::Array<bool, Eigen::Dynamic, 1> shell(size_);
  std::array<int, kMaxTensorDim> idx{};
  for (Eigen::Index k = 0; k < size_; ++k) {
    multi_index(k, idx);
    bool on = false;
    for (int a = 0; a < dim_; ++a) on = on || idx[a] < width || idx[a] >= n_ - width;
    shell[k] = on;
  }
  return shell;
}

RadialGrid::RadialGrid(int dim, double r_max, int intervals, double scale)
    : dim_(dim), r_max_(r_max), intervals_(intervals), scale_(scale) {
  if (dim < 1) throw DomainError("radial grid dimension must be positive");
  if (intervals < 6 || intervals % 2 != 0) throw DomainError("radial grid needs an even number (>= 6) of intervals");
  if (!(r_max > 0.0) || !(scale > 0.0)) throw DomainError("radial grid extent and scale must be positive");
  const double xi_max = std::log1p(r_max / scale);
  dxi_ = xi_max / intervals;
  const Eigen::Index m = intervals + 1;
  r_.resize(m);
  dr_.resize(m);
  w_.resize(m);
  const double sphere = unit_sphere_area(dim);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = static_cast<double>(i) * dxi_;
    r_[i] = scale * std::expm1(xi);
    dr_[i] = scale * std::exp(xi);
    // composite Simpson in xi
    const double simpson = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w_[i] = sphere * std::pow(r_[i], dim - 1) * dr_[i] * simpson * dxi_ / 3.0;
  }
  r_[m - 1] = r_max;
}

Eigen::ArrayXd RadialGrid::xi_derivative(const Eigen::ArrayXd& f) const {
  const Eigen::Index m = f.size();
  if (m < 5) throw DomainError("radial profiles need at least 5 nodes");
  Eigen::ArrayXd d(m);
  const double c = 1.0 / (12.0 * dxi_);
  d[0] = c * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
  d[1] = c * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
  for (Eigen::Index i = 2; i < m - 2; ++i) d[i] = c * (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]);
  const Eigen::Index e = m - 1;
  d[e] = -c * (-25 * f[e] + 48 * f[e - 1] - 36 * f[e - 2] + 16 * f[e - 3] - 3 * f[e - 4]);
  d[e - 1] = -c * (-3 * f[e] - 10 * f[e - 1] + 18 * f[e - 2] - 6 * f[e - 3] + f[e - 4]);
  return d;
}

Eigen::ArrayXd RadialGrid::xi_second_derivative(const Eigen::ArrayXd& f) const {
  const Eigen::Index m = f.size();
  if (m < 6) throw DomainError("radial second derivative needs at least 6 nodes");
  Eigen::ArrayXd d(m);
  const double c = 1.0 / (12.0 * dxi_ * dxi_);
  d[0] = c * (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]);
  d[1] = c * (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]);
  for (Eigen::Index i = 2; i < m - 2; ++i)
    d[i] = c * (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]);
  const Eigen::Index e = m - 1;
  d[e] = c * (45 * f[e] - 154 * f[e - 1] + 214 * f[e - 2] - 156 * f[e - 3] + 61 * f[e - 4] - 10 * f[e - 5]);
  d[e - 1] = c * (10 * f[e] - 15 * f[e - 1] - 4 * f[e - 2] + 14 * f[e - 3] - 6 * f[e - 4] + f[e - 5]);
  return d;
}

Eigen::ArrayXd RadialGrid::derivative(const Eigen::ArrayXd& f) const { return xi_derivative(f) / dr_; }

Eigen::ArrayXd RadialGrid::laplacian(const Eigen::ArrayXd& f) const {
  const Eigen::ArrayXd fx = xi_derivative(f);
  const Eigen::ArrayXd fxx = xi_second_derivative(f);
  // r(xi) = a (e^xi - 1) has r'' = r'
  const Eigen::ArrayXd frr = (fxx - fx) / dr_.square();
  Eigen::ArrayXd lap(f.size());
  lap[0] = dim_ * frr[0];
  for (Eigen::Index i = 1; i < f.size(); ++i) lap[i] = frr[i] + (dim_ - 1) * fx[i] / dr_[i] / r_[i];
  return lap;
}

void require_finite(const Eigen::ArrayXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite sample values");
}

double integrate(const Field& f) {
  require_finite(f.values, "integrate");
  return f.grid->cell_volume() * f.values.sum();
}

double integrate(const RadialField& f) {
  require_finite(f.values, "integrate");
  return (f.grid->weights() * f.values).sum();
}

double grad_sq_integral(const Field& u) {
  require_finite(u.values, "grad_sq_integral");
  const Spectrum s = fourier_forward(u);
  const TensorGrid& g = *u.grid;
  const Eigen::ArrayXd& k2 = wave_number_sq(g);
  const Eigen::ArrayXd& mult = spectrum_multiplicity(g);
  const double norm = g.cell_volume() / static_cast<double>(g.size());
  return norm * (mult * k2 * s.coeffs.abs2()).sum();
}

double grad_sq_integral(const RadialField& u) {
  require_finite(u.values, "grad_sq_integral");
  const Eigen::ArrayXd du = u.grid->derivative(u.values);
  return (u.grid->weights() * du.square()).sum();
}

double lp_norm(const Field& f, double p) {
  require_finite(f.values, "lp_norm");
  return std::pow(f.grid->cell_volume() * f.values.abs().pow(p).sum(), 1.0 / p);
}

double lp_norm(const RadialField& f, double p) {
  require_finite(f.values, "lp_norm");
  return std::pow((f.grid->weights() * f.values.abs().pow(p)).sum(), 1.0 / p);
}

Field shift_cells(const Field& f, std::span<const int> cells) {
  const TensorGrid& g = *f.grid;
  if (static_cast<int>(cells.size()) != g.dim()) throw GridMismatch("shift has wrong dimension");
  Eigen::ArrayXd out(f.size());
  std::array<int, kMaxTensorDim> idx{};
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    g.multi_index(k, idx);
    for (int a = 0; a < g.dim(); ++a) idx[a] += cells[a];
    out[g.flat_index(std::span<const int>(idx.data(), g.dim()))] = f.values[k];
  }
  return f.with_values(std::move(out));
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

double unit_sphere_area(int dim) { return dim * unit_ball_volume(dim); }

}  // namespace choquard
