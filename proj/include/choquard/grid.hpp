#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "choquard/errors.hpp"

namespace choquard {

inline constexpr int kMaxTensorDim = 5;
using Point = Eigen::VectorXd;

/// Uniform periodic grid on [-L, L)^N with n points per axis, row-major.
class TensorGrid {
 public:
  static constexpr std::int64_t kDefaultPointBudget = std::int64_t{1} << 26;

  TensorGrid(int dim, int n, double half_width, std::int64_t point_budget = kDefaultPointBudget);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return 2.0 * half_width_ / n_; }
  double cell_volume() const;
  Eigen::Index size() const { return size_; }

  double coordinate(int i) const { return -half_width_ + i * spacing(); }
  /// Integer index of the grid point closest to x along one axis (clamped).
  int nearest_index(double x) const;
  void multi_index(Eigen::Index flat, std::array<int, kMaxTensorDim>& idx) const;
  Eigen::Index flat_index(std::span<const int> idx) const;
  void point(Eigen::Index flat, double* x) const;
  Point point(Eigen::Index flat) const;
  /// Index of the sample at the origin (n/2 along every axis).
  Eigen::Index origin_index() const;

  /// Euclidean norm |x| of every grid point.
  Eigen::ArrayXd radii() const;
  /// Coordinate x_axis of every grid point.
  Eigen::ArrayXd axis_coordinates(int axis) const;
  /// True on points whose index touches the outermost shell of the box.
  Eigen::Array<bool, Eigen::Dynamic, 1> boundary_shell(int width = 1) const;

  bool operator==(const TensorGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && half_width_ == o.half_width_;
  }
  bool operator!=(const TensorGrid& o) const { return !(*this == o); }

 private:
  int dim_;
  int n_;
  double half_width_;
  Eigen::Index size_;
};

/// Radial nodes r = a (exp(xi) - 1) on a uniform xi mesh; weights include |S^{N-1}| r^{N-1}.
class RadialGrid {
 public:
  RadialGrid(int dim, double r_max, int intervals, double scale = 1e-2);

  int dim() const { return dim_; }
  double r_max() const { return r_max_; }
  double scale() const { return scale_; }
  int intervals() const { return intervals_; }
  Eigen::Index size() const { return r_.size(); }
  double xi_step() const { return dxi_; }
  /// Ratio of consecutive node spacings (constant for the exponential map).
  double grading_ratio() const { return std::exp(dxi_); }
  /// Node spacing around radius r.
  double local_spacing(double r) const { return (r + scale_) * dxi_; }

  const Eigen::ArrayXd& nodes() const { return r_; }
  const Eigen::ArrayXd& weights() const { return w_; }
  /// dr/dxi at the nodes.
  const Eigen::ArrayXd& jacobian() const { return dr_; }

  /// d/dr of a sampled profile (fourth-order differences in xi).
  Eigen::ArrayXd derivative(const Eigen::ArrayXd& f) const;
  /// Radial Laplacian f'' + (N-1)/r f'.
  Eigen::ArrayXd laplacian(const Eigen::ArrayXd& f) const;

  bool operator==(const RadialGrid& o) const {
    return dim_ == o.dim_ && r_max_ == o.r_max_ && intervals_ == o.intervals_ && scale_ == o.scale_;
  }
  bool operator!=(const RadialGrid& o) const { return !(*this == o); }

 private:
  Eigen::ArrayXd xi_derivative(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd xi_second_derivative(const Eigen::ArrayXd& f) const;

  int dim_;
  double r_max_;
  int intervals_;
  double scale_;
  double dxi_;
  Eigen::ArrayXd r_, w_, dr_;
};

/// Sampled real function on a grid. Values are plain Eigen arrays, so the usual
/// coefficient-wise expressions apply directly to `values`.
template <class Grid>
struct GridField {
  std::shared_ptr<const Grid> grid;
  Eigen::ArrayXd values;
  std::string label;

  GridField() = default;
  GridField(std::shared_ptr<const Grid> g, Eigen::ArrayXd v, std::string l = {})
      : grid(std::move(g)), values(std::move(v)), label(std::move(l)) {}

  static GridField zeros(std::shared_ptr<const Grid> g, std::string l = {}) {
    const auto n = g->size();
    return GridField(std::move(g), Eigen::ArrayXd::Zero(n), std::move(l));
  }
  GridField with_values(Eigen::ArrayXd v, std::string l = {}) const {
    return GridField(grid, std::move(v), l.empty() ? label : std::move(l));
  }
  Eigen::Index size() const { return values.size(); }
};

using Field = GridField<TensorGrid>;
using RadialField = GridField<RadialGrid>;

template <class Grid>
void require_same_grid(const GridField<Grid>& a, const GridField<Grid>& b) {
  if (!a.grid || !b.grid || (a.grid != b.grid && *a.grid != *b.grid))
    throw GridMismatch("fields live on different grids");
}

void require_finite(const Eigen::ArrayXd& v, const char* what);

/// Sample f(x) at every grid point.
template <class F>
Field sample(std::shared_ptr<const TensorGrid> g, F&& f, std::string label = {}) {
  Eigen::ArrayXd v(g->size());
  std::array<double, kMaxTensorDim> x{};
  for (Eigen::Index k = 0; k < g->size(); ++k) {
    g->point(k, x.data());
    v[k] = f(std::span<const double>(x.data(), g->dim()));
  }
  return Field(std::move(g), std::move(v), std::move(label));
}

template <class F>
RadialField sample_radial(std::shared_ptr<const RadialGrid> g, F&& f, std::string label = {}) {
  const Eigen::ArrayXd& r = g->nodes();
  Eigen::ArrayXd v(r.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) v[k] = f(r[k]);
  return RadialField(std::move(g), std::move(v), std::move(label));
}

double integrate(const Field& f);
double integrate(const RadialField& f);

/// Dirichlet energy: Parseval with the spectral symbol on tensor grids,
/// fourth-order differences of the profile on radial grids.
double grad_sq_integral(const Field& u);
double grad_sq_integral(const RadialField& u);

/// L^p norm (|f|_p) with the grid quadrature.
double lp_norm(const Field& f, double p);
double lp_norm(const RadialField& f, double p);

/// Circular shift by whole cells along each axis.
Field shift_cells(const Field& f, std::span<const int> cells);

/// Volume of the unit ball and area of the unit sphere in R^N.
double unit_ball_volume(int dim);
double unit_sphere_area(int dim);

}  // namespace choquard
