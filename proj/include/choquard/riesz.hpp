#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

/// Free-space convolution with |x|^{-mu} on a TensorGrid via 2x zero padding.
///
/// The kernel is sampled on the padded (2n)^N grid at minimal-image offsets, so its
/// spectrum is real. The origin cell holds the mean of |x|^{-mu} over a ball of the
/// cell's volume. Forward and backward transforms skip the all-zero padding lines.
/// Instances are immutable after construction and may be shared between threads.
class RieszOperator {
 public:
  RieszOperator(std::shared_ptr<const TensorGrid> grid, double mu);
  ~RieszOperator();
  RieszOperator(const RieszOperator&) = delete;
  RieszOperator& operator=(const RieszOperator&) = delete;

  double mu() const { return mu_; }
  const std::shared_ptr<const TensorGrid>& grid() const { return grid_; }
  double origin_value() const { return origin_value_; }

  /// (|x|^{-mu} * f)(x_i) ~ h^N sum_j K(x_i - x_j) f_j.
  Field apply(const Field& f) const;
  Eigen::ArrayXd apply(const Eigen::ArrayXd& f) const;

 private:
  struct Buffer;
  struct Plans;
  std::unique_ptr<Buffer> acquire() const;
  void release(std::unique_ptr<Buffer> b) const;

  std::shared_ptr<const TensorGrid> grid_;
  double mu_;
  double origin_value_;
  Eigen::Index half_size_;
  Eigen::ArrayXd kernel_hat_;  // real spectrum of the padded kernel, half-complex layout
  std::unique_ptr<Plans> plans_;
  mutable std::mutex pool_mutex_;
  mutable std::vector<std::unique_ptr<Buffer>> pool_;
};

Field riesz_convolve(const RieszOperator& op, const Field& f);

/// D(u) = int |u|^q (|x|^{-mu} * |u|^q). Throws GridMismatch if u is not on op's grid.
double double_integral_D(const RieszOperator& op, const Field& u, double q);
/// D(u)^{1/(2q)}.
double nl_norm(const RieszOperator& op, const Field& u, double q);

/// Spherical average of |r e - s w|^{-mu} over w in S^{N-1}, written as
/// max(r,s)^{-mu} F(min/max) with F(rho) = mean over the sphere of |e - rho w|^{-mu}.
/// F is tabulated once per (N, mu) on rho = 1 - (1-t)^3 with uniform t and read back by
/// four-point Lagrange interpolation. F(1) is finite only for mu < N - 1.
class RadialRieszTable {
 public:
  RadialRieszTable(int dim, double mu, int nodes = 8192);
  /// Adopt a previously tabulated profile (same node layout).
  RadialRieszTable(int dim, double mu, Eigen::ArrayXd table);

  int dim() const { return dim_; }
  double mu() const { return mu_; }
  /// Angular profile F(rho), 0 <= rho <= 1.
  double profile(double rho) const;
  /// Spherical mean wbar(r, s) = max(r,s)^{-mu} F(min/max).
  double mean_kernel(double r, double s) const;
  /// |S^{N-2}| int_0^pi (r^2 + s^2 - 2 r s cos t)^{-mu/2} sin^{N-2} t dt = |S^{N-1}| wbar(r, s).
  double angular_weight(double r, double s) const;
  const Eigen::ArrayXd& table() const { return table_; }

  /// Direct quadrature of F at one point (used to build the table).
  static double profile_quadrature(int dim, double mu, double rho);

 private:
  int dim_;
  double mu_;
  Eigen::ArrayXd table_;
};

/// Shared table for (N, mu); cached on disk under $CHOQUARD_CACHE_DIR when that is set.
std::shared_ptr<const RadialRieszTable> radial_riesz_table(int dim, double mu);

/// Riesz potential (|x|^{-mu} * f)(r_i) of a radial profile.
Eigen::ArrayXd radial_riesz_potential(const RadialRieszTable& table, const RadialGrid& grid,
                                      const Eigen::ArrayXd& f);
double double_integral_D(const RadialRieszTable& table, const RadialField& u, double q);
double nl_norm(const RadialRieszTable& table, const RadialField& u, double q);

}  // namespace choquard
