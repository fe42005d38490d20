#include "choquard/params.hpp"

#include <algorithm>
#include <limits>

namespace choquard {

ExponentSet derive_exponents(int dim, double mu) {
  if (dim < 3) throw DomainError("dimension must be at least 3");
  if (!(mu > 0.0 && mu < dim)) throw DomainError("mu must lie in (0, N)");
  const double n = dim;
  return {(2 * n - mu) / (n - 2), 2 * (n - mu + 2) / (n - 2), (n + 2 - mu) / (4 * n - 2 * mu)};
}

void ProblemParams::validate() const {
  const ExponentSet e = derive_exponents(N, mu);
  if (!(e.two_mu_star > 2.0)) throw DomainError("critical exponent 2mu* must exceed 2 (needs mu < 4)");
  if (indefinite_mode && !(mu < 4.0)) throw DomainError("indefinite mode needs mu < 4");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
}

std::string to_string(WellKind k) {
  switch (k) {
    case WellKind::ball: return "ball_well";
    case WellKind::box: return "box_well";
    case WellKind::annulus: return "annulus_well";
    case WellKind::smooth_ramp: return "smooth_ramp_well";
  }
  return "?";
}

WellKind well_kind_from_string(const std::string& s) {
  if (s == "ball_well" || s == "ball") return WellKind::ball;
  if (s == "box_well" || s == "box") return WellKind::box;
  if (s == "annulus_well" || s == "annulus") return WellKind::annulus;
  if (s == "smooth_ramp_well" || s == "smooth_ramp") return WellKind::smooth_ramp;
  throw DomainError("unknown well kind '" + s + "'");
}

Potential Potential::ball_well(double radius) {
  Potential p;
  p.radius = radius;
  return p;
}

Potential Potential::box_well(std::vector<double> half_widths) {
  Potential p;
  p.kind = WellKind::box;
  p.half_widths = std::move(half_widths);
  return p;
}

Potential Potential::annulus_well(double inner, double outer) {
  Potential p;
  p.kind = WellKind::annulus;
  p.inner_radius = inner;
  p.outer_radius = outer;
  p.origin_override = true;
  return p;
}

Potential Potential::smooth_ramp_well(double radius) {
  Potential p;
  p.kind = WellKind::smooth_ramp;
  p.radius = radius;
  p.height_cap.reset();
  return p;
}

double Potential::distance(std::span<const double> x) const {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  switch (kind) {
    case WellKind::ball:
    case WellKind::smooth_ramp: return std::max(r - radius, 0.0);
    case WellKind::annulus: return std::max({inner_radius - r, r - outer_radius, 0.0});
    case WellKind::box: {
      double d2 = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        const double w = half_widths.empty() ? 1.0 : half_widths.at(a);
        const double e = std::max(std::abs(x[a]) - w, 0.0);
        d2 += e * e;
      }
      return std::sqrt(d2);
    }
  }
  return 0.0;
}

bool Potential::in_zero_set(std::span<const double> x) const {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  switch (kind) {
    case WellKind::ball:
    case WellKind::smooth_ramp: return r < radius;
    case WellKind::annulus: return r > inner_radius && r < outer_radius;
    case WellKind::box:
      for (std::size_t a = 0; a < x.size(); ++a)
        if (!(std::abs(x[a]) < (half_widths.empty() ? 1.0 : half_widths.at(a)))) return false;
      return true;
  }
  return false;
}

double Potential::operator()(std::span<const double> x) const {
  const double s = distance(x) / ramp_width;
  if (!height_cap) return s * s;
  const double c = std::min(s, 1.0);
  return *height_cap * c * c * (3.0 - 2.0 * c);
}

double Potential::extent(int dim) const {
  switch (kind) {
    case WellKind::ball:
    case WellKind::smooth_ramp: return radius;
    case WellKind::annulus: return outer_radius;
    case WellKind::box: {
      if (half_widths.empty()) return std::sqrt(static_cast<double>(dim));
      double s = 0.0;
      for (double w : half_widths) s += w * w;
      return std::sqrt(s);
    }
  }
  return 0.0;
}

void Potential::check() const {
  if (!(ramp_width > 0.0)) throw DomainError("ramp_width must be positive");
  if (!(M0 > 0.0)) throw DomainError("M0 must be positive");
  if (height_cap && !(*height_cap > 0.0)) throw DomainError("height_cap must be positive");
  if ((kind == WellKind::ball || kind == WellKind::smooth_ramp) && !(radius > 0.0))
    throw DomainError("well radius must be positive");
  if (kind == WellKind::annulus && !(inner_radius >= 0.0 && outer_radius > inner_radius))
    throw DomainError("annulus needs 0 <= inner < outer");
  for (double w : half_widths)
    if (!(w > 0.0)) throw DomainError("box half-widths must be positive");
}

Field sample_potential(const Potential& V, std::shared_ptr<const TensorGrid> g) {
  V.check();
  if (V.kind == WellKind::box && !V.half_widths.empty() && static_cast<int>(V.half_widths.size()) != g->dim())
    throw DomainError("box well needs one half-width per axis");
  return sample(std::move(g), [&](std::span<const double> x) { return V(x); }, "V");
}

Field zero_set_mask(const Potential& V, std::shared_ptr<const TensorGrid> g) {
  return sample(std::move(g), [&](std::span<const double> x) { return V.in_zero_set(x) ? 1.0 : 0.0; }, "mask");
}

ValidationReport validate_potential(const Field& V, double M0, bool origin_override) {
  require_finite(V.values, "validate_potential");
  const TensorGrid& g = *V.grid;
  ValidationReport rep;
  rep.min_value = V.values.minCoeff();
  if (rep.min_value < 0.0) throw DomainError("potential is negative somewhere on the grid");
  const auto zero = (V.values <= 0.0);
  rep.zero_points = zero.count();
  if (rep.zero_points == 0) throw DomainError("zero set of the potential is empty on the grid");
  const auto shell = g.boundary_shell();
  rep.shell_min = std::numeric_limits<double>::infinity();
  bool zero_on_shell = false, sublevel_on_shell = false;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (!shell[k]) continue;
    rep.shell_min = std::min(rep.shell_min, V.values[k]);
    zero_on_shell = zero_on_shell || zero[k];
    sublevel_on_shell = sublevel_on_shell || V.values[k] <= M0;
  }
  const Eigen::Index sub = (V.values <= M0).count();
  rep.sublevel_fraction = static_cast<double>(sub) / static_cast<double>(g.size());
  rep.sublevel_volume = static_cast<double>(sub) * g.cell_volume();
  rep.origin_in_zero_set = V.values[g.origin_index()] <= 0.0;

  rep.zero_set_ok = !zero_on_shell && (rep.origin_in_zero_set || origin_override);
  if (zero_on_shell) rep.notes.push_back("zero set reaches the box boundary shell (unbounded relative to the box)");
  if (!rep.origin_in_zero_set)
    rep.notes.push_back(origin_override ? "origin not in zero set (accepted by override)" : "origin not in zero set");
  rep.sublevel_ok = !sublevel_on_shell;
  if (!rep.sublevel_ok) rep.notes.push_back("sublevel set {V <= M0} reaches the box boundary shell");
  rep.shell_ok = rep.shell_min > 0.0;
  rep.notes.push_back("sublevel and shell conditions checked on the finite box only");
  return rep;
}

ValidationReport validate_potential(const Potential& V, std::shared_ptr<const TensorGrid> g) {
  return validate_potential(sample_potential(V, std::move(g)), V.M0, V.origin_override);
}

}  // namespace choquard
