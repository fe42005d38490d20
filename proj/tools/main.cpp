// choquard: command-line driver for constants, bubble tables, ground states, sweeps and spectra.
//
// Precedence: built-in defaults < --config file < command-line flags.
// Exit codes: 0 success, 1 scientific check failed, 2 usage or configuration error,
// 3 numerical divergence or non-convergence of an inner solver.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"

#include "choquard/bubbles.hpp"
#include "choquard/config.hpp"
#include "choquard/report.hpp"
#include "choquard/snapshot.hpp"
#include "choquard/solver.hpp"
#include "choquard/spectra.hpp"

namespace fs = std::filesystem;
using namespace choquard;

namespace {

constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

/// Flags shared by every subcommand; unset optionals leave the config value alone.
struct Overrides {
  std::string config;
  std::optional<int> N, n, seed;
  std::optional<double> mu, lambda, beta, beta_ratio, half_width, init_eps;
  std::optional<std::string> output, well;
  std::vector<double> lambdas, beta_ratios, eps_list;
  bool no_snapshots = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "configuration file (TOML subset)");
  sub->add_option("--N", o.N, "space dimension");
  sub->add_option("--mu", o.mu, "Riesz exponent, 0 < mu < N");
  sub->add_option("--lambda", o.lambda, "well depth parameter");
  sub->add_option("--beta", o.beta, "linear coefficient beta");
  sub->add_option("--beta-ratio", o.beta_ratio, "beta as a multiple of beta_1(Omega)");
  sub->add_option("--n", o.n, "grid points per axis (power of two)");
  sub->add_option("--half-width", o.half_width, "box half width L");
  sub->add_option("--well", o.well, "ball | box | annulus | smooth_ramp");
  sub->add_option("--init-eps", o.init_eps, "width of the initial bubble");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--output,-o", o.output, "output directory");
  sub->add_flag("--no-snapshots", o.no_snapshots, "skip field snapshots");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = apply_config(load_config_file(o.config));
  if (o.N) c.params.N = *o.N;
  if (o.mu) c.params.mu = *o.mu;
  if (o.lambda) c.params.lambda = *o.lambda;
  if (o.beta) {
    c.params.beta = *o.beta;
    c.beta_ratio.reset();
  }
  if (o.beta_ratio) c.beta_ratio = *o.beta_ratio;
  if (o.n) c.n = *o.n;
  if (o.half_width) c.half_width = *o.half_width;
  if (o.well) {
    switch (well_kind_from_string(*o.well)) {
      case WellKind::ball: c.potential = Potential::ball_well(); break;
      case WellKind::box: c.potential = Potential::box_well(); break;
      case WellKind::annulus: c.potential = Potential::annulus_well(); break;
      case WellKind::smooth_ramp: c.potential = Potential::smooth_ramp_well(); break;
    }
  }
  if (o.init_eps) c.init_eps = *o.init_eps;
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("--seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(*o.seed);
  }
  if (o.output) c.output = *o.output;
  if (!o.lambdas.empty()) c.lambdas = o.lambdas;
  if (!o.beta_ratios.empty()) c.beta_ratios = o.beta_ratios;
  if (!o.eps_list.empty()) c.eps_list = o.eps_list;
  if (o.no_snapshots) c.snapshots = false;
  c.validate();
  return c;
}

/// Grid, potential samples and Dirichlet data for one run.
struct Setup {
  std::shared_ptr<const TensorGrid> grid;
  Eigen::ArrayXd omega;
  double beta1 = 0.0;
  Model model;
};

/// Dirichlet eigenvalues are computed when beta depends on them or `dirichlet_count` > 0 asks for them.
Setup make_setup(RunConfig& c, int dirichlet_count = 0) {
  Setup s;
  s.grid = std::make_shared<const TensorGrid>(c.params.N, c.n, c.half_width);
  s.omega = zero_set_mask(c.potential, s.grid).values;
  validate_potential(c.potential, s.grid);
  if (c.beta_ratio || c.params.beta > 0.0 || dirichlet_count > 0) {
    const DirichletEigs d = dirichlet_eigs(s.grid, s.omega, std::max(1, dirichlet_count), c.eig);
    s.beta1 = d.values[0];
    if (c.beta_ratio) c.params.beta = *c.beta_ratio * s.beta1;
  }
  s.model = Model::make(c.params, s.grid, &c.potential);
  return s;
}

/// Bubble of width init_eps (default: a quarter of the well size) at the grid point of the zero set
/// nearest to its centroid.
Field initial_field(const RunConfig& c, const Setup& s) {
  const double eps = c.init_eps.value_or(0.25 * c.potential.extent(c.params.N) /
                                         (c.potential.kind == WellKind::annulus ? 3.0 : 1.0));
  Point centroid = Point::Zero(c.params.N);
  double count = 0.0;
  for (Eigen::Index i = 0; i < s.omega.size(); ++i)
    if (s.omega[i] > 0.5) {
      centroid += s.grid->point(i);
      count += 1.0;
    }
  centroid /= count;
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.omega.size(); ++i)
    if (s.omega[i] > 0.5) {
      const double d = (s.grid->point(i) - centroid).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
  return bubble_seed(s.grid, eps, s.grid->point(best));
}

void snapshot(const RunConfig& c, const std::string& stem, const Field& f) {
  if (!c.snapshots) return;
  fs::create_directories(c.output);
  write_snapshot(fs::path(c.output) / stem, f, config_hash(c));
}

json header(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"config_hash", config_hash(c)}, {"N", c.params.N}, {"mu", c.params.mu},
          {"lambda", c.params.lambda}, {"beta", c.params.beta}, {"well", to_string(c.potential.kind)},
          {"n", c.n}, {"half_width", c.half_width}, {"seed", c.seed}};
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

int cmd_constants(const RunConfig& c) {
  const ConstantSet k = compute_constants(c.params.N, c.params.mu, c.radial_intervals);
  json doc = header(c, "constants");
  doc["constants"] = to_json(k);
  const bool ok = k.relation_gap() <= 1e-2;
  doc["relation_ok"] = ok;
  write_json(fs::path(c.output) / "constants.json", doc);
  std::cout << doc.dump(2) << "\n";
  return ok ? 0 : kExitCheck;
}

int cmd_bubbles(const RunConfig& c) {
  const AsymptoticTable t = bubble_asymptotics(c.params.N, c.params.mu, c.eps_list, c.delta, c.radial_intervals);
  CsvTable csv({"eps", "grad_sq", "D", "l2_sq", "remainder", "l2_ratio", "reliable"}, config_hash(c));
  for (const auto& r : t.rows)
    csv.add({r.eps, r.grad_sq, r.D, r.l2_sq, r.remainder, r.l2_ratio, std::string(r.reliable ? "1" : "0")});
  json doc = header(c, "bubbles");
  doc["table"] = to_json(t);
  write_json(fs::path(c.output) / "bubbles.json", doc);
  csv.write(fs::path(c.output) / "bubbles.csv");
  std::cout << csv.text();
  std::printf("remainder exponent %.4f (expected %d), l2 ratio variation %.4f\n", t.remainder_exponent,
              c.params.N - 2, t.l2_ratio_variation);
  return 0;
}

int cmd_groundstate(RunConfig c) {
  Setup s = make_setup(c);
  if (c.params.beta > 0.0 && !(c.params.beta < s.beta1))
    throw DomainError("beta >= beta_1(Omega): the quadratic form is indefinite, use the indefinite command");
  if (c.params.beta > 0.0 && c.params.lambda * c.potential.M0 < c.params.beta)
    throw DomainError("need lambda M0 >= beta in the definite regime");
  const SolveResult r = ground_state_definite(s.model, initial_field(c, s), c.solver);
  json doc = header(c, "groundstate");
  doc["beta_1"] = s.beta1;
  doc["result"] = to_json(r);
  write_json(fs::path(c.output) / "groundstate.json", doc);
  snapshot(c, "groundstate", r.u);
  std::printf("J = %.10g (c_* = %.10g), %s after %d iterations, |grad| = %.3e\n", r.e.J, r.threshold,
              r.status.c_str(), r.iterations, r.grad_norm);
  return r.converged && r.below_threshold ? 0 : kExitCheck;
}

int cmd_sweep_lambda(RunConfig c) {
  Setup s = make_setup(c);
  if (!(c.params.beta > 0.0 && c.params.beta < s.beta1)) throw DomainError("sweep-lambda needs 0 < beta < beta_1");
  const LambdaSweep sw = lambda_sweep(s.model, c.lambdas, initial_field(c, s), c.solver);
  const std::string verdict = (sw.mass_decreasing && sw.distance_decreasing && sw.energy_nondecreasing &&
                               sw.below_limit)
                                  ? "monotone"
                                  : "violated";
  CsvTable csv({"lambda", "J", "A", "D", "mass_outside", "potential_mass", "h1_distance", "iterations",
                "converged", "grad_norm", "nehari_residual", "c_limit", "verdict"},
               config_hash(c));
  for (const auto& row : sw.rows) {
    const auto& r = row.result;
    csv.add({row.lambda, r.e.J, r.e.A, r.e.nonlocal, r.mass_outside.value_or(0.0), row.potential_mass,
             row.h1_distance, static_cast<long long>(r.iterations), std::string(r.converged ? "1" : "0"),
             r.grad_norm, r.nehari_residual, sw.limit.e.J, verdict});
  }
  csv.write(fs::path(c.output) / "sweep_lambda.csv");
  json doc = header(c, "sweep-lambda");
  doc["beta_1"] = s.beta1;
  doc["limit"] = to_json(sw.limit);
  doc["mass_decreasing"] = sw.mass_decreasing;
  doc["distance_decreasing"] = sw.distance_decreasing;
  doc["energy_nondecreasing"] = sw.energy_nondecreasing;
  doc["below_limit"] = sw.below_limit;
  write_json(fs::path(c.output) / "sweep_lambda.json", doc);
  for (const auto& row : sw.rows)
    if (row.result.converged) snapshot(c, "lambda_" + format_real(row.lambda), row.result.u);
  std::cout << csv.text();
  bool all = sw.limit.converged;
  for (const auto& row : sw.rows) all = all && row.result.converged;
  return all && verdict == "monotone" ? 0 : kExitCheck;
}

int cmd_sweep_beta(RunConfig c) {
  c.beta_ratio.reset();
  Setup s = make_setup(c, 1);
  std::vector<double> betas;
  for (double r : c.beta_ratios) betas.push_back(r * s.beta1);
  for (double r : c.beta_ratios)
    if (!(r > 0.0 && r < 1.0)) throw DomainError("beta ratios must lie in (0, 1)");
  const BetaSweep sw = beta_sweep(s.model, s.omega, betas, initial_field(c, s), c.solver);
  CsvTable csv({"beta", "beta_ratio", "J", "t_beta", "gap_to_c_star", "gap_to_grid_reference", "iterations",
                "converged", "grad_norm", "nehari_residual"},
               config_hash(c));
  for (const auto& row : sw.rows) {
    const auto& r = row.result;
    csv.add({row.beta, row.beta / s.beta1, r.e.J, row.t_beta, sw.c_star - r.e.J, sw.reference.e.J - r.e.J,
             static_cast<long long>(r.iterations), std::string(r.converged ? "1" : "0"), r.grad_norm,
             r.nehari_residual});
  }
  csv.write(fs::path(c.output) / "sweep_beta.csv");
  json doc = header(c, "sweep-beta");
  doc["beta_1"] = s.beta1;
  doc["c_star"] = sw.c_star;
  doc["grid_reference"] = to_json(sw.reference);
  doc["t_converging"] = sw.t_converging;
  doc["gap_decreasing"] = sw.gap_decreasing;
  doc["grid_gap_decreasing"] = sw.grid_gap_decreasing;
  doc["below_threshold"] = sw.below_threshold;
  write_json(fs::path(c.output) / "sweep_beta.json", doc);
  for (const auto& row : sw.rows)
    if (row.result.converged) snapshot(c, "beta_" + format_real(row.beta / s.beta1), row.result.u);
  std::cout << csv.text();
  return sw.t_converging && sw.gap_decreasing ? 0 : kExitCheck;
}

int cmd_eigs(RunConfig c) {
  Setup s = make_setup(c, c.eig_count);
  const DirichletEigs d = dirichlet_eigs(s.grid, s.omega, c.eig_count, c.eig);
  CsvTable csv({"lambda", "j", "zeta", "target", "gap", "residual"}, config_hash(c));
  json doc = header(c, "eigs");
  doc["dirichlet"] = to_json(d.values);
  doc["splits"] = json::array();
  std::vector<Field> start;
  for (double lam : c.lambdas) {
    const SpectralSplit sp = schrodinger_eigs(s.grid, s.model.V, lam, c.params.beta, c.eig_count,
                                              c.degeneracy_margin * s.beta1, c.eig, start);
    start = sp.fields;
    for (int j = 0; j < sp.zeta.size(); ++j) {
      const double target = d.values[j] - c.params.beta;
      csv.add({lam, static_cast<long long>(j + 1), sp.zeta[j], target, std::abs(sp.zeta[j] - target),
               sp.residuals[j]});
      if (c.snapshots) snapshot(c, "eig_" + format_real(lam) + "_" + std::to_string(j + 1), sp.fields[j]);
    }
    doc["splits"].push_back(to_json(sp));
  }
  csv.write(fs::path(c.output) / "eigs.csv");
  write_json(fs::path(c.output) / "eigs.json", doc);
  std::cout << csv.text();
  return 0;
}

int cmd_indefinite(RunConfig c) {
  Setup s = make_setup(c);
  const SpectralSplit sp = schrodinger_eigs(s.grid, s.model.V, c.params.lambda, c.params.beta, c.eig_count,
                                            c.degeneracy_margin * s.beta1, c.eig);
  if (sp.morse_index == 0) throw DomainError("morse index 0: definite regime, use groundstate");
  if (sp.morse_index >= c.eig_count) throw DomainError("every computed eigenvalue is negative; raise eigen.count");
  const SolveResult r = ground_state_indefinite(s.model, sp, initial_field(c, s), c.solver);
  const double level_gap = std::abs(r.level_direct - r.e.J) / std::abs(r.e.J);
  json doc = header(c, "indefinite");
  doc["beta_1"] = s.beta1;
  doc["split"] = to_json(sp);
  doc["result"] = to_json(r);
  write_json(fs::path(c.output) / "indefinite.json", doc);
  snapshot(c, "indefinite", r.u);
  std::printf("c** = %.10g, direct = %.10g (gap %.2e), c_* = %.10g, morse index %d, %s\n", r.e.J, r.level_direct,
              level_gap, r.threshold, sp.morse_index, r.status.c_str());
  return r.converged && r.below_threshold && level_gap < 1e-3 ? 0 : kExitCheck;
}

int cmd_multiplicity(RunConfig c, double r_cluster) {
  Setup s = make_setup(c);
  if (!(c.params.beta >= 0.0 && (s.beta1 == 0.0 || c.params.beta < s.beta1)))
    throw DomainError("multiplicity needs 0 <= beta < beta_1");
  const Potential& V = c.potential;
  double radius = 0.0;
  switch (V.kind) {
    case WellKind::annulus: radius = 0.5 * (V.inner_radius + V.outer_radius); break;
    case WellKind::box: radius = 0.5 * (V.half_widths.empty() ? 1.0 : V.half_widths[0]); break;
    default: radius = 0.5 * V.radius; break;
  }
  std::mt19937_64 rng(c.seed);
  const double offset = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  const double eps = c.init_eps.value_or(0.25 * (V.kind == WellKind::annulus ? V.outer_radius - V.inner_radius
                                                                             : V.radius));
  std::vector<Field> seeds;
  for (int k = 0; k < c.multistart_seeds; ++k) {
    const double th = offset + 2.0 * std::numbers::pi * k / c.multistart_seeds;
    Point p = Point::Zero(c.params.N);
    p[0] = radius * std::cos(th);
    p[1] = radius * std::sin(th);
    seeds.push_back(bubble_seed(s.grid, eps, p));
  }
  const MultiplicityReport rep = multistart_multiplicity(s.model, seeds, r_cluster, c.solver);
  std::vector<std::string> cols{"seed", "J", "converged", "cluster"};
  for (int a = 0; a < c.params.N; ++a) cols.push_back("alpha_c_" + std::to_string(a + 1));
  CsvTable csv(cols, config_hash(c));
  for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
    const auto& r = rep.solutions[i];
    std::vector<CsvTable::Cell> row{static_cast<long long>(i), r.e.J, std::string(r.converged ? "1" : "0"),
                                    static_cast<long long>(rep.cluster_of[i])};
    for (int a = 0; a < c.params.N; ++a) row.push_back(r.truncated_barycenter[a]);
    csv.add(row);
    if (r.converged) snapshot(c, "multistart_" + std::to_string(i), r.u);
  }
  csv.write(fs::path(c.output) / "multiplicity.csv");
  json doc = header(c, "multiplicity");
  doc["r"] = r_cluster;
  doc["clusters"] = rep.clusters;
  doc["barycenters_in_neighbourhood"] = rep.barycenters_in_neighbourhood;
  write_json(fs::path(c.output) / "multiplicity.json", doc);
  std::cout << csv.text();
  std::printf("%d distinct solutions; barycenters in the 2r neighbourhood: %s\n", rep.clusters,
              yes_no(rep.barycenters_in_neighbourhood).c_str());
  return rep.barycenters_in_neighbourhood ? 0 : kExitCheck;
}

int cmd_validate(const RunConfig& c) {
  auto g = std::make_shared<const TensorGrid>(c.params.N, c.n, c.half_width);
  const ValidationReport v = validate_potential(c.potential, g);
  json doc = header(c, "validate");
  doc["report"] = to_json(v);
  write_json(fs::path(c.output) / "validate.json", doc);
  std::cout << doc.dump(2) << "\n";
  return v.zero_set_ok && v.sublevel_ok && v.shell_ok ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the critical Choquard equation with a potential well"};
  app.require_subcommand(1);
  Overrides o;
  double r_cluster = 0.25;
  int intervals = 0;

  auto* constants = app.add_subcommand("constants", "sharp constants, S_HL and c_* for (N, mu)");
  auto* bubbles = app.add_subcommand("bubbles", "cutoff bubble asymptotics over a list of eps");
  auto* groundstate = app.add_subcommand("groundstate", "definite ground state (Nehari descent)");
  auto* sweep_lambda = app.add_subcommand("sweep-lambda", "continuation over increasing lambda");
  auto* sweep_beta = app.add_subcommand("sweep-beta", "masked limit problem for decreasing beta");
  auto* eigs = app.add_subcommand("eigs", "lowest eigenvalues of -Delta + lambda V - beta");
  auto* indefinite = app.add_subcommand("indefinite", "ground state through the reduction on E^+");
  auto* multiplicity = app.add_subcommand("multiplicity", "multistart from translated bubbles");
  auto* validate = app.add_subcommand("validate", "check the potential well: sign, zero set, sublevel set, boundary shell");
  for (auto* sub : app.get_subcommands({})) add_common(sub, o);
  for (auto* sub : {constants, bubbles}) sub->add_option("--intervals", intervals, "radial grid intervals");
  bubbles->add_option("--eps", o.eps_list, "comma separated eps values")->delimiter(',');
  sweep_lambda->add_option("--lambdas", o.lambdas, "comma separated, increasing")->delimiter(',');
  eigs->add_option("--lambdas", o.lambdas, "comma separated lambda values")->delimiter(',');
  sweep_beta->add_option("--beta-ratios", o.beta_ratios, "comma separated, decreasing, in (0, 1)")->delimiter(',');
  multiplicity->add_option("--r", r_cluster, "cluster radius r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    RunConfig c = resolve(o);
    if (intervals > 0) {
      c.radial_intervals = intervals;
      c.validate();
    }
    if (!std::isfinite(r_cluster) || !(r_cluster > 0.0)) throw ConfigError("--r must be positive");
    if (constants->parsed()) return cmd_constants(c);
    if (bubbles->parsed()) return cmd_bubbles(c);
    if (groundstate->parsed()) return cmd_groundstate(c);
    if (sweep_lambda->parsed()) return cmd_sweep_lambda(c);
    if (sweep_beta->parsed()) return cmd_sweep_beta(c);
    if (eigs->parsed()) return cmd_eigs(c);
    if (indefinite->parsed()) return cmd_indefinite(c);
    if (multiplicity->parsed()) return cmd_multiplicity(c, r_cluster);
    if (validate->parsed()) return cmd_validate(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GridMismatch& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DegenerateSplit& e) {
    std::cerr << "degenerate split: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NonFiniteError& e) {
    std::cerr << "non-finite values: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheck;
  }
  return kExitUsage;
}
