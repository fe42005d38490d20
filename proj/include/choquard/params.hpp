#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

struct ExponentSet {
  double two_mu_star;  // (2N - mu) / (N - 2)
  double nehari_exp;   // 2 * two_mu_star - 2
  double level_coeff;  // (N + 2 - mu) / (4N - 2 mu)
};

/// Throws DomainError for N < 3 or mu outside (0, N).
ExponentSet derive_exponents(int dim, double mu);

struct ProblemParams {
  int N = 4;
  double mu = 2.0;
  double lambda = 0.0;
  double beta = 0.0;
  bool indefinite_mode = false;

  /// Checks every invariant; the critical exponent must exceed 2, which means mu < 4.
  void validate() const;
  ExponentSet exponents() const { return derive_exponents(N, mu); }
  double q() const { return exponents().two_mu_star; }
};

enum class WellKind { ball, box, annulus, smooth_ramp };

std::string to_string(WellKind k);
WellKind well_kind_from_string(const std::string& s);

/// Potential well V(x) = cap * sigma(dist(x, Omega) / ramp_width), sigma(s) = 3s^2 - 2s^3 on [0,1],
/// or (dist / ramp_width)^2 when the cap is absent (unbounded growth).
struct Potential {
  WellKind kind = WellKind::ball;
  double radius = 1.0;                 // ball and smooth_ramp
  std::vector<double> half_widths;     // box; empty means 1 along every axis
  double inner_radius = 0.5;           // annulus
  double outer_radius = 1.5;           // annulus
  double ramp_width = 0.5;
  double M0 = 1.0;
  std::optional<double> height_cap = 2.0;
  /// Accept a zero set that misses the origin (annulus wells).
  bool origin_override = false;

  static Potential ball_well(double radius = 1.0);
  static Potential box_well(std::vector<double> half_widths = {});
  /// Annulus wells come with origin_override set.
  static Potential annulus_well(double inner = 0.5, double outer = 1.5);
  static Potential smooth_ramp_well(double radius = 1.0);

  /// Euclidean distance from x to the zero set.
  double distance(std::span<const double> x) const;
  double operator()(std::span<const double> x) const;
  /// Open zero set: points on the boundary of Omega are outside (they carry the Dirichlet condition).
  bool in_zero_set(std::span<const double> x) const;
  /// Radius of a ball containing the zero set.
  double extent(int dim) const;
  void check() const;
};

Field sample_potential(const Potential& V, std::shared_ptr<const TensorGrid> g);
/// 1 in the open zero set, 0 elsewhere (boundary points included).
Field zero_set_mask(const Potential& V, std::shared_ptr<const TensorGrid> g);

/// Proxies on the finite box: the sublevel and growth conditions concern behaviour at infinity and are
/// judged on the outermost grid shell only.
struct ValidationReport {
  double min_value = 0.0;
  double sublevel_fraction = 0.0;  // volume of {V <= M0} / box volume
  double sublevel_volume = 0.0;
  double shell_min = 0.0;          // min of V over the outermost grid shell
  Eigen::Index zero_points = 0;
  bool origin_in_zero_set = false;
  bool zero_set_ok = false;  // V >= 0, zero set bounded in the box and containing the origin
  bool sublevel_ok = false;  // {V <= M0} stays off the boundary shell
  bool shell_ok = false;     // V > 0 on the boundary shell
  std::vector<std::string> notes;
};

/// Throws DomainError when V < 0 somewhere or the zero set is empty on the grid.
ValidationReport validate_potential(const Field& V, double M0, bool origin_override = false);
ValidationReport validate_potential(const Potential& V, std::shared_ptr<const TensorGrid> g);

}  // namespace choquard
