// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: choquard_acceptance [criterion ...]   (default: all of 1..10)

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "choquard/bubbles.hpp"
#include "choquard/fourier.hpp"
#include "choquard/functional.hpp"
#include "choquard/solver.hpp"
#include "choquard/spectra.hpp"

using namespace choquard;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::array<std::pair<int, double>, 4> kPairs{{{4, 2.0}, {4, 1.0}, {5, 1.0}, {5, 3.0}}};

// Constants for the four pairs, shared by criteria 1-3 (criterion 1 also times them).
struct ConstantsRun {
  std::vector<ConstantSet> sets;
  std::vector<double> seconds;
};
const ConstantsRun& constants_run() {
  static const ConstantsRun run = [] {
    ConstantsRun r;
    for (auto [N, mu] : kPairs) {
      const auto t0 = std::chrono::steady_clock::now();
      r.sets.push_back(compute_constants(N, mu, 20000));
      r.seconds.push_back(seconds_since(t0));
    }
    return r;
  }();
  return run;
}

Outcome criterion1() {
  const ConstantsRun& run = constants_run();
  Outcome o{true, ""};
  for (std::size_t i = 0; i < run.sets.size(); ++i) {
    const ConstantSet& c = run.sets[i];
    const double rel = std::abs(c.hls_ratio - c.C_hls) / c.C_hls;
    o.pass = o.pass && rel < 1e-3 && run.seconds[i] < 60.0;
    o.detail += fmt("(%d,%g) C=%.8f ratio rel %.1e in %.1fs; ", c.N, c.mu, c.C_hls, rel, run.seconds[i]);
  }
  return o;
}

Outcome criterion2() {
  Outcome o{true, ""};
  for (const ConstantSet& c : constants_run().sets) {
    const double g = std::abs(c.grad_tilde - c.tilde_target) / c.tilde_target;
    const double d = std::abs(c.D_tilde - c.tilde_target) / c.tilde_target;
    o.pass = o.pass && c.relation_gap() < 1e-3 && g < 1e-3 && d < 1e-3;
    o.detail += fmt("(%d,%g) S_HL gap %.1e grad %.1e D %.1e; ", c.N, c.mu, c.relation_gap(), g, d);
  }
  return o;
}

Outcome criterion3() {
  Outcome o{true, ""};
  for (const ConstantSet& c : constants_run().sets) {
    o.pass = o.pass && c.residual < 1e-2 && std::abs(c.pohozaev) < 1e-2;
    o.detail += fmt("(%d,%g) residual %.1e pohozaev %.1e; ", c.N, c.mu, c.residual, c.pohozaev);
  }
  return o;
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{true, ""};
  for (auto [N, mu] : {std::pair{4, 2.0}, std::pair{5, 1.0}}) {
    const AsymptoticTable t = bubble_asymptotics(N, mu, {0.1, 0.05, 0.025}, 1.0, 20000);
    const bool ok = std::abs(t.remainder_exponent - (N - 2)) <= 0.5 && t.l2_ratio_variation < 0.1;
    o.pass = o.pass && ok;
    o.detail += fmt("N=%d exponent %.4f l2 ratio variation %.4f; ", N, t.remainder_exponent, t.l2_ratio_variation);
  }
  const double s = seconds_since(t0);
  o.pass = o.pass && s < 300.0;
  o.detail += fmt("%.0fs", s);
  return o;
}

// Ball well, N = 4, mu = 2, beta = 0.5 beta_1 on the open zero set of the grid.
struct WellSetup {
  std::shared_ptr<const TensorGrid> grid;
  Potential V = Potential::ball_well(1.0);
  Eigen::ArrayXd omega;
  double beta1 = 0.0;
  Model model;
  Field seed;
};

WellSetup well_setup(int n, double lambda, double beta_ratio) {
  WellSetup s;
  s.grid = std::make_shared<const TensorGrid>(4, n, 2.0);
  s.omega = zero_set_mask(s.V, s.grid).values;
  s.beta1 = dirichlet_eigs(s.grid, s.omega, 1).values[0];
  ProblemParams p;
  p.N = 4;
  p.mu = 2.0;
  p.lambda = lambda;
  p.beta = beta_ratio * s.beta1;
  s.model = Model::make(p, s.grid, &s.V);
  s.seed = bubble_seed(s.grid, 0.25, Point::Zero(4));
  return s;
}

const WellSetup& well32() {
  static const WellSetup s = well_setup(32, 1e4, 0.5);
  return s;
}

// lambda sweep at n = 32, shared by criteria 5 and 6
struct SweepRun {
  LambdaSweep sweep;
  double seconds = 0.0;
};
const SweepRun& sweep_run() {
  static const SweepRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRun r;
    r.sweep = lambda_sweep(well32().model, {1e2, 1e3, 1e4}, well32().seed);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

// Same-grid error of a converged level: the aliasing shift of J (energy without the band limit)
// plus the energy uncertainty left by the stopping rule.
double level_tolerance(const Model& m, const SolveResult& r) {
  Model plain = m;
  plain.dealias = false;
  const double alias = std::abs(energy(plain, r.u).J - r.e.J);
  return alias + r.grad_norm * r.grad_norm * r.e.A + std::abs(r.nehari_residual) * r.e.A;
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const WellSetup& s = well32();
  const SolveResult& lam = sweep_run().sweep.rows.back().result;
  const SolveResult lim = ground_state_limit_problem(s.model, s.omega, s.model.params.beta, s.seed);
  const double c_star = lim.threshold;
  const double tol = std::max(level_tolerance(s.model, lam),
                              level_tolerance(s.model.limit_problem(s.omega, s.model.params.beta), lim));
  const double gap_low = lim.e.J - lam.e.J;
  const double gap_high = c_star - lim.e.J;
  const double secs = sweep_run().seconds + seconds_since(t0);
  Outcome o;
  o.pass = lam.converged && lim.converged && gap_low > 2 * tol && gap_high > 2 * tol && secs < 1800.0;
  o.detail = fmt("c_lambda=%.8f c(beta,Omega)=%.8f c_*=%.8f gaps %.3e %.3e tol %.2e, %.0fs", lam.e.J, lim.e.J,
                 c_star, gap_low, gap_high, tol, secs);
  return o;
}

Outcome criterion6() {
  const LambdaSweep& sw = sweep_run().sweep;
  Outcome o{true, ""};
  bool converged = sw.limit.converged;
  for (const LambdaRow& r : sw.rows) {
    converged = converged && r.result.converged;
    o.detail += fmt("lambda=%g outside %.3e dist %.4e; ", r.lambda, r.result.mass_outside.value_or(-1.0),
                    r.h1_distance);
  }
  const double last = sw.rows.back().result.mass_outside.value_or(1.0);
  o.pass = converged && sw.mass_decreasing && sw.distance_decreasing && last < 1e-2;
  return o;
}

Outcome criterion7() {
  const WellSetup& s = well32();
  const double b1 = s.beta1;
  const BetaSweep sw = beta_sweep(s.model, s.omega, {0.3 * b1, 0.1 * b1, 0.03 * b1}, s.seed);
  Outcome o{true, ""};
  bool converged = sw.reference.converged;
  for (const BetaRow& r : sw.rows) {
    converged = converged && r.result.converged;
    o.detail += fmt("beta/beta1=%.2f c=%.6f |t-1|=%.3e; ", r.beta / b1, r.result.e.J, std::abs(r.t_beta - 1.0));
  }
  const double final_gap = std::abs(sw.c_star - sw.rows.back().result.e.J) / sw.c_star;
  o.pass = converged && sw.t_converging && sw.gap_decreasing && final_gap < 0.15 && sw.grid_gap_decreasing;
  o.detail += fmt("final |gap| %.4f c_*, grid reference %.6f", final_gap, sw.reference.e.J);
  return o;
}

Outcome criterion8() {
  auto g = std::make_shared<const TensorGrid>(4, 16, 2.0);
  const Potential V = Potential::ball_well(1.0);
  const Field Vs = sample_potential(V, g);
  // the lambda -> infinity limit is the Dirichlet problem on the grid's closed zero set {V <= 0}
  const Eigen::ArrayXd closed = (Vs.values <= 0.0).cast<double>();
  const DirichletEigs d = dirichlet_eigs(g, closed, 5);
  const double beta = 1.5 * d.values[0];
  // zeta_j - (beta_j - beta) does not depend on beta; the sweep runs at beta = 0 so that every
  // computed eigenvalue stays positive at lambda = 100
  Outcome o{true, ""};
  std::array<double, 3> prev;
  prev.fill(std::numeric_limits<double>::infinity());
  SpectralSplit last;
  std::vector<Field> start;
  for (double lambda : {1e2, 1e3, 1e4}) {
    last = schrodinger_eigs(g, Vs.values, lambda, 0.0, 5, 1e-6 * d.values[0], {}, start);
    start = last.fields;
    o.detail += fmt("lambda=%g:", lambda);
    for (int j = 0; j < 3; ++j) {
      const double gap = std::abs(last.zeta[j] - d.values[j]);
      o.pass = o.pass && gap < prev[j];
      prev[j] = gap;
      o.detail += fmt(" %.3e", gap);
    }
    o.detail += "; ";
  }
  auto count_below = [&](double b) {
    int k = 0;
    for (Eigen::Index j = 0; j < d.values.size(); ++j) k += d.values[j] < b;
    return k;
  };
  const int m_hi = last.with_beta(beta, 1e-6 * d.values[0]).morse_index;
  const int m_lo = last.with_beta(0.5 * d.values[0], 1e-6 * d.values[0]).morse_index;
  o.pass = o.pass && m_hi == count_below(beta) && m_hi == 1 && m_lo == count_below(0.5 * d.values[0]) && m_lo == 0;
  o.detail += fmt("morse index %d at 1.5 beta_1, %d at 0.5 beta_1", m_hi, m_lo);
  return o;
}

Outcome criterion9() {
  WellSetup s = well_setup(16, 1e4, 1.5);
  ProblemParams p = s.model.params;
  p.indefinite_mode = true;
  s.model = s.model.with_params(p);
  const SpectralSplit sp = schrodinger_eigs(s.grid, s.model.V, p.lambda, p.beta, 5, 1e-6 * s.beta1);
  if (sp.morse_index != 1) return {false, fmt("unexpected morse index %d", sp.morse_index)};
  const SolveResult r = ground_state_indefinite(s.model, sp, s.seed);

  // 20 random probes in E^+: bubbles at random points of the well
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ud(-0.5, 0.5);
  std::uniform_real_distribution<double> ue(0.15, 0.4);
  int concave = 0;
  double worst_residual = 0.0;
  for (int k = 0; k < 20; ++k) {
    Point c(4);
    for (int a = 0; a < 4; ++a) c[a] = ud(rng);
    const Field w = project_plus(sp.negative_basis(), bubble_seed(s.grid, ue(rng), c));
    const ReducedPoint h = reduction_h(s.model, sp, w);
    concave += h.concave && (h.hessian_eigs.array() < 0.0).all();
    worst_residual = std::max(worst_residual, h.residual);
  }
  const double level_gap = std::abs(r.level_direct - r.e.J) / std::abs(r.e.J);
  Outcome o;
  o.pass = r.converged && r.reduction_residual < 1e-9 && worst_residual < 1e-9 && concave == 20 && level_gap < 1e-3 &&
           r.e.J < r.threshold;
  o.detail = fmt("c**=%.8f direct=%.8f gap %.1e, residual %.1e (probes %.1e), concave %d/20, c_*=%.6f", r.e.J,
                 r.level_direct, level_gap, r.reduction_residual, worst_residual, concave, r.threshold);
  return o;
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

Field bump(std::shared_ptr<const TensorGrid> g, const std::vector<double>& c, double eps) {
  return sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int i = 0; i < g->dim(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    return cutoff_bubble(g->dim(), eps, 2.0 * eps, std::sqrt(r2));
  });
}

Outcome criterion10() {
  Outcome o{true, ""};
  auto check = [&](const char* name, bool ok, double value) {
    o.pass = o.pass && ok;
    o.detail += fmt("%s %.1e %s; ", name, value, ok ? "ok" : "FAILED");
  };

  ProblemParams p;
  p.N = 3;
  p.mu = 1.0;
  p.lambda = 10.0;
  p.beta = 2.0;
  auto g = std::make_shared<const TensorGrid>(3, 16, 2.0);
  const Potential V = Potential::ball_well(1.0);
  const Model m = Model::make(p, g, &V);
  std::mt19937 rng(11);

  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Field u = random_smooth(g, rng);
    const Field phi = random_smooth(g, rng);
    const double t = 1e-5;
    const double fd = (energy(m, u.with_values(u.values + t * phi.values)).J -
                       energy(m, u.with_values(u.values - t * phi.values)).J) /
                      (2 * t);
    const double an = inner(gradient(m, u), phi);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  check("gradient/FD", worst < 1e-6, worst);

  double nehari = 0.0;
  for (int k = 0; k < 5; ++k) {
    Field u = random_smooth(g, rng);
    u.values = u.values.abs();
    const EnergyBreakdown e = energy(m, nehari_project(m, u).u);
    nehari = std::max(nehari, std::abs(nehari_residual(e)) / e.A);
  }
  check("Nehari", nehari < 1e-10, nehari);

  const Model free_model = Model::make([&] {
    ProblemParams f = p;
    f.lambda = f.beta = 0.0;
    return f;
  }(), g);
  const Field u = bump(g, {0.0, 0.25, 0.0}, 0.2);
  const double D0 = double_integral_D(*free_model.riesz, u, free_model.q);
  const std::array<int, 3> s{3, -2, 1};
  const double trans = std::abs(double_integral_D(*free_model.riesz, translate(u, s), free_model.q) / D0 - 1.0);
  check("D translation", trans < 1e-10, trans);
  // dilation u -> s^{(N-2)/2} u(s x) sampled on the grid of spacing h / s, s = 2
  auto g2 = std::make_shared<const TensorGrid>(3, 16, 1.0);
  const RieszOperator op2(g2, 1.0);
  const double amp = std::pow(2.0, 0.5);
  const Field u2 = sample(g2, [&](std::span<const double> x) {
    double r2 = x[0] * x[0] + (x[1] - 0.125) * (x[1] - 0.125) + x[2] * x[2];
    return amp * cutoff_bubble(3, 0.2, 0.4, 2.0 * std::sqrt(r2));
  });
  const double dil = std::abs(double_integral_D(op2, u2, free_model.q) / D0 - 1.0);
  check("D dilation", dil < 1e-10, dil);

  {
    // support radius 0.2, separations of 8, 12 and 16 support radii
    auto gb = std::make_shared<const TensorGrid>(3, 64, 4.0);
    const RieszOperator op(gb, 1.0);
    const double q = derive_exponents(3, 1.0).two_mu_star;
    const Field b = bump(gb, {-2.5, 0.0, 0.0}, 0.05);
    const double D = double_integral_D(op, b, q);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last = 0.0;
    for (int cells : {13, 19, 26}) {
      const std::array<int, 3> sh{cells, 0, 0};
      last = brezis_lieb_defect(op, b, b, sh, q) / D;
      decreasing = decreasing && last < prev && last < 0.1;
      prev = last;
    }
    check("Brezis-Lieb decreasing, last defect", decreasing, last);
  }

  {
    std::normal_distribution<double> nd;
    Field f = Field::zeros(g);
    for (auto& v : f.values) v = nd(rng);
    const Spectrum sp = fourier_forward(f);
    const double direct = integrate(f.with_values(f.values.square()));
    const double pars = std::abs(spectral_l2_sq(sp) - direct) / direct;
    const double trip = (fourier_backward(sp).values - f.values).abs().maxCoeff() / f.values.abs().maxCoeff();
    check("Parseval", pars < 1e-10, pars);
    check("round trip", trip < 1e-12, trip);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  if (wanted.empty())
    for (const auto& [k, f] : criteria) wanted.insert(k);

  bool all = true;
  for (int k : wanted) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s  [%.0fs] %s\n", k, o.pass ? "PASS" : "FAIL", seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
