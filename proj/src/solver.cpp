#include "choquard/solver.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <numeric>

#include "choquard/bubbles.hpp"
#include "choquard/fourier.hpp"

namespace choquard {

double threshold_level(int dim, double mu) {
  static std::mutex mtx;
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard lock(mtx);
  auto it = cache.find({dim, mu});
  if (it != cache.end()) return it->second;
  derive_exponents(dim, mu);
  const double S = sobolev_constant(*default_radial_grid(dim));
  const double shl = S / std::pow(hls_constant(dim, mu), (dim - 2.0) / (2.0 * dim - mu));
  return cache[{dim, mu}] = critical_level(dim, mu, shl);
}

Field bubble_seed(std::shared_ptr<const TensorGrid> g, double eps, const Point& center) {
  const int N = g->dim();
  if (center.size() != N) throw GridMismatch("seed center has wrong dimension");
  return sample(
      std::move(g),
      [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int a = 0; a < N; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        return cutoff_bubble(N, eps, 2.0 * eps, std::sqrt(r2));
      },
      "seed");
}

Field precondition(const Model& m, const Field& g, double kappa) {
  const Eigen::ArrayXd d = (1.0 + m.params.lambda * m.V / kappa).rsqrt();
  Eigen::ArrayXd x = d * g.values;
  if (m.mask) x *= *m.mask;
  Spectrum s = fourier_forward(g.with_values(std::move(x)));
  s.coeffs *= (wave_number_sq(*m.grid) + kappa).inverse();
  Eigen::ArrayXd y = d * fourier_backward(s).values;
  if (m.mask) y *= *m.mask;
  return g.with_values(std::move(y));
}

Field precondition_krylov(const Model& m, const Field& g, double kappa, int steps) {
  if (steps <= 0 || (m.params.lambda == 0.0 && !m.mask)) return precondition(m, g, kappa);
  const Eigen::ArrayXd k2 = wave_number_sq(*m.grid);
  const Eigen::ArrayXd shift = m.params.lambda * m.V + kappa;
  auto apply = [&](const Eigen::ArrayXd& x) {
    Spectrum s = fourier_forward(g.with_values(x));
    s.coeffs *= k2;
    Eigen::ArrayXd y = fourier_backward(s).values + shift * x;
    if (m.mask) y *= *m.mask;
    return y;
  };
  Eigen::ArrayXd r = g.values;
  if (m.mask) r *= *m.mask;
  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(r.size());
  Eigen::ArrayXd z = precondition(m, g.with_values(r), kappa).values;
  Eigen::ArrayXd p = z;
  double rz = (r * z).sum();
  for (int k = 0; k < steps && rz > 0.0; ++k) {
    const Eigen::ArrayXd Ap = apply(p);
    const double pAp = (p * Ap).sum();
    if (!(pAp > 0.0)) break;
    const double a = rz / pAp;
    x += a * p;
    if (k + 1 == steps) break;
    r -= a * Ap;
    z = precondition(m, g.with_values(r), kappa).values;
    const double rz_next = (r * z).sum();
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return g.with_values(std::move(x));
}

namespace {

double quadratic_form(const Model& m, const Field& u) {
  const double hN = m.grid->cell_volume();
  return grad_sq_integral(u) + hN * ((m.params.lambda * m.V - m.params.beta) * u.values.square()).sum();
}

/// Point on the Nehari set along the ray through v, with energy, gradient and potential at t v.
struct NehariState {
  Field u;
  EnergyBreakdown e;
  Field g;
  double t = 0.0;
};

std::optional<NehariState> nehari_state(const Model& m, const Field& v) {
  if (!(v.values.abs().maxCoeff() > 0.0)) return std::nullopt;
  Evaluation ev = evaluate(m, v);
  if (!(ev.e.nonlocal > 0.0)) return std::nullopt;
  if (!(ev.e.A > 0.0)) throw DomainError("quadratic form is not positive: outside the definite regime");
  const double q = m.q;
  const double t = std::pow(ev.e.A / ev.e.nonlocal, 1.0 / (2.0 * q - 2.0));
  Eigen::ArrayXd nl = ev.nonlinear;
  if (m.mask) nl *= *m.mask;
  // J'(t v) = t (linear part at v) - t^{2q-1} (nonlinear part at v)
  Eigen::ArrayXd g = t * (ev.grad.values + nl) - std::pow(t, 2.0 * q - 1.0) * nl;
  NehariState s{v.with_values(t * v.values), ev.e.scaled(t), v.with_values(std::move(g)), t};
  s.u.label = "u";
  s.g.label = "gradient";
  return s;
}

Eigen::ArrayXd zero_set_indicator(const Model& m) {
  if (m.mask) return *m.mask;
  return (m.V <= 0.0).cast<double>();
}

void finish(const Model& m, SolveResult& r) {
  const int N = m.params.N;
  r.threshold = threshold_level(N, m.params.mu);
  r.below_threshold = r.e.J < r.threshold;
  r.barycenter = barycenter(r.u);
  r.truncated_barycenter = truncated_barycenter(r.u, 0.5 * m.grid->half_width());
  if (m.mask || (m.params.lambda > 0.0 && (m.V > 0.0).any()))
    r.mass_outside = mass_fraction_outside(r.u, zero_set_indicator(m));
  if (m.params.lambda == 0.0) {
    const double scale = 0.5 * (N - 2) * r.e.dirichlet;
    r.pohozaev = pohozaev_residual(N, r.e, -m.params.beta) / scale;
  }
}

/// Nonmonotone acceptance window.
struct Window {
  std::deque<double> vals;
  std::size_t cap;
  void push(double v) {
    vals.push_back(v);
    if (vals.size() > cap) vals.pop_front();
  }
  double max() const { return *std::max_element(vals.begin(), vals.end()); }
};

}  // namespace

Eigen::ArrayXd inscribed_ball_mask(const TensorGrid& g) {
  const double R = g.half_width() - 2.0 * g.spacing();
  return (g.radii() <= R).cast<double>();
}

SolveResult ground_state_definite(const Model& m_in, const Field& init, const SolverOptions& opt) {
  if (!init.grid || *init.grid != *m_in.grid) throw GridMismatch("initial field is not on the model grid");
  // without a potential the periodic constant mode has A = 0 and drains the energy
  const bool free_space = m_in.params.lambda == 0.0 && !m_in.mask;
  const Model m = free_space ? m_in.limit_problem(inscribed_ball_mask(*m_in.grid), m_in.params.beta) : m_in;
  Field v0 = init;
  if (m.mask) v0.values *= *m.mask;
  SolveResult res;
  res.threshold = threshold_level(m.params.N, m.params.mu);
  auto st = nehari_state(m, v0);
  if (!st) {
    res.u = v0;
    res.status = "zero_collapse";
    return res;
  }
  const double ps0 = st->e.A + st->e.nonlocal;
  Field Pg = precondition_krylov(m, st->g, opt.kappa, opt.inner_steps);
  double gPg = inner(st->g, Pg);
  double step = 1.0;
  Window window{{}, static_cast<std::size_t>(std::max(1, opt.memory))};
  window.push(st->e.J);
  res.energies.push_back(st->e.J);
  int increases = 0;
  res.ps_ratio = 1.0;

  for (res.iterations = 0;; ++res.iterations) {
    res.grad_norm = std::sqrt(std::max(gPg, 0.0) / st->e.A);
    if (opt.trace) opt.trace(res.iterations, st->e.J, res.grad_norm);
    if (res.grad_norm < opt.grad_tol) {
      res.status = "converged";
      break;
    }
    if (res.iterations >= opt.max_iter) {
      res.status = "max_iter";
      break;
    }
    std::optional<NehariState> next;
    double s = step;
    for (;;) {
      next = nehari_state(m, st->u.with_values(st->u.values - s * Pg.values));
      if (!next) {
        res.u = st->u;
        res.e = st->e;
        res.status = "zero_collapse";
        finish(m, res);
        return res;
      }
      if (next->e.J <= window.max() - 1e-4 * s * gPg || s <= opt.step_min) break;
      s = std::max(0.5 * s, opt.step_min);
    }
    increases = next->e.J > st->e.J ? increases + 1 : 0;
    if (increases >= opt.divergence_window)
      throw DivergenceError("energy increased over " + std::to_string(increases) + " consecutive steps (J = " +
                            std::to_string(next->e.J) + ")");
    res.ps_ratio = std::max(res.ps_ratio, (next->e.A + next->e.nonlocal) / ps0);
    if (res.ps_ratio > opt.ps_factor) throw DivergenceError("descent trajectory left the bounded PS region");

    Field Pg_next = precondition_krylov(m, next->g, opt.kappa, opt.inner_steps);
    const Eigen::ArrayXd du = next->u.values - st->u.values;
    const Eigen::ArrayXd dg = next->g.values - st->g.values;
    const double sy = (du * dg).sum();
    const double yPy = (dg * (Pg_next.values - Pg.values)).sum();
    step = (sy > 0.0 && yPy > 0.0) ? std::clamp(sy / yPy, opt.step_min, opt.step_max) : opt.step_max;

    st = std::move(next);
    Pg = std::move(Pg_next);
    gPg = inner(st->g, Pg);
    window.push(st->e.J);
    res.energies.push_back(st->e.J);
  }
  res.u = st->u;
  res.e = st->e;
  res.nehari_residual = std::abs(nehari_residual(res.e)) / res.e.A;
  res.converged = res.status == "converged" && res.nehari_residual < 1e-10;
  finish(m, res);
  return res;
}

SolveResult ground_state_limit_problem(const Model& m, const Eigen::ArrayXd& mask, double beta, const Field& init,
                                       const SolverOptions& opt) {
  return ground_state_definite(m.limit_problem(mask, beta), init, opt);
}

namespace {

struct JointMax {
  double s = 0.0;
  Eigen::VectorXd c;
  Field u;
  Evaluation ev;
  int steps = 0;
};

/// max over (s > 0, c) of J(s w + sum c_i e_i) by damped Newton.
JointMax joint_max(const Model& m, const std::vector<Field>& basis, const Eigen::VectorXd& zeta, const Field& w,
                   double s0, Eigen::VectorXd c0) {
  const int k = static_cast<int>(basis.size());
  std::vector<Field> dirs{w};
  dirs.insert(dirs.end(), basis.begin(), basis.end());
  Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(k + 1, k + 1);
  quad(0, 0) = quadratic_form(m, w);
  for (int i = 0; i < k; ++i) quad(i + 1, i + 1) = zeta[i];

  auto assemble = [&](const Eigen::VectorXd& x) {
    Eigen::ArrayXd v = x[0] * w.values;
    for (int i = 0; i < k; ++i) v += x[i + 1] * basis[i].values;
    return w.with_values(std::move(v));
  };
  auto grad_of = [&](const Evaluation& ev) {
    Eigen::VectorXd G(k + 1);
    for (int i = 0; i <= k; ++i) G[i] = inner(ev.grad, dirs[i]);
    return G;
  };

  Eigen::VectorXd x(k + 1);
  x[0] = s0;
  x.tail(k) = c0;
  JointMax jm;
  jm.u = assemble(x);
  jm.ev = evaluate(m, jm.u);
  Eigen::VectorXd G = grad_of(jm.ev);
  for (jm.steps = 0; jm.steps < 60; ++jm.steps) {
    if (G.lpNorm<Eigen::Infinity>() < 1e-11 * std::max(1.0, x.norm())) break;
    const Eigen::MatrixXd H = directional_hessian(m, jm.u, jm.ev.phi, dirs, quad);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd step = (es.eigenvalues().array() < 0.0).all()
                               ? Eigen::VectorXd(-H.ldlt().solve(G))
                               : Eigen::VectorXd(G / std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
    double damp = 1.0;
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries, damp *= 0.5) {
      const Eigen::VectorXd xn = x + damp * step;
      if (!(xn[0] > 0.0)) continue;
      Field un = assemble(xn);
      Evaluation en = evaluate(m, un);
      if (en.e.J >= jm.ev.e.J - 1e-14 * std::abs(jm.ev.e.J)) {
        x = xn;
        jm.u = std::move(un);
        jm.ev = std::move(en);
        moved = true;
        break;
      }
    }
    G = grad_of(jm.ev);
    if (!moved) break;
  }
  jm.s = x[0];
  jm.c = x.tail(k);
  return jm;
}

Field project_out(const std::vector<Field>& basis, Field f) {
  for (const Field& e : basis) f.values -= inner(f, e) * e.values;
  return f;
}

}  // namespace

double halfspace_max(const Model& m, const SpectralSplit& split, const Field& w_in) {
  const std::vector<Field> basis = split.negative_basis();
  const int k = static_cast<int>(basis.size());
  const Field w = project_out(basis, w_in);
  const double Aw = quadratic_form(m, w);
  if (!(Aw > 0.0)) throw DomainError("direction has non-positive quadratic form");
  const double q = m.q;
  const double coeff = derive_exponents(m.params.N, m.params.mu).level_coeff;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
  auto G = [&](const Eigen::VectorXd& cc) {
    Eigen::ArrayXd v = w.values;
    for (int i = 0; i < k; ++i) v += cc[i] * basis[i].values;
    // same energy as the descent (band limit included)
    const EnergyBreakdown e = energy(m, w.with_values(std::move(v)));
    if (!(e.A > 0.0) || !(e.nonlocal > 0.0)) return 0.0;
    return coeff * std::pow(std::pow(e.A, q) / e.nonlocal, 1.0 / (q - 1.0));
  };
  double best = G(c);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int cycle = 0; cycle < (k == 1 ? 1 : 30); ++cycle) {
    const double before = best;
    for (int i = 0; i < k; ++i) {
      double rem = Aw;
      for (int j = 0; j < k; ++j)
        if (j != i) rem += split.zeta[j] * c[j] * c[j];
      const double b = std::sqrt(std::max(rem, 0.0) / std::abs(split.zeta[i])) * (1.0 - 1e-9);
      auto Gi = [&](double x) {
        Eigen::VectorXd cc = c;
        cc[i] = x;
        return G(cc);
      };
      double lo = -b, hi = b;
      double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
      double f1 = Gi(x1), f2 = Gi(x2);
      while (hi - lo > 1e-10 * std::max(1.0, b)) {
        if (f1 > f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - r * (hi - lo);
          f1 = Gi(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + r * (hi - lo);
          f2 = Gi(x2);
        }
      }
      c[i] = 0.5 * (lo + hi);
      best = G(c);
    }
    if (std::abs(best - before) <= 1e-13 * std::abs(best)) break;
  }
  return best;
}

SolveResult ground_state_indefinite(const Model& m, const SpectralSplit& split, const Field& init,
                                    const SolverOptions& opt) {
  if (split.morse_index < 1) throw DomainError("indefinite solver needs morse_index >= 1 (definite regime given)");
  if (!(m.params.mu < 4.0)) throw DomainError("indefinite solver needs mu < 4");
  if (std::abs(split.beta - m.params.beta) > 1e-12 * std::max(1.0, m.params.beta) ||
      std::abs(split.lambda - m.params.lambda) > 1e-12 * std::max(1.0, m.params.lambda))
    throw DomainError("spectral split was computed for other (lambda, beta)");
  const std::vector<Field> basis = split.negative_basis();
  const Eigen::VectorXd zeta = split.zeta.head(basis.size());
  const int k = static_cast<int>(basis.size());

  SolveResult res;
  res.threshold = threshold_level(m.params.N, m.params.mu);
  Field uplus = project_out(basis, init);
  const double n0 = std::sqrt(inner(uplus, uplus));
  if (!(n0 > 0.0)) {
    res.u = init;
    res.status = "zero_collapse";
    return res;
  }

  auto normalized = [&](const Field& f) { return f.with_values(f.values / std::sqrt(inner(f, f))); };
  Field w = normalized(uplus);
  double s0;
  {
    const double Aw = quadratic_form(m, w);
    const double Dw = double_integral_D(*m.riesz, w, m.q);
    s0 = std::pow(Aw / Dw, 1.0 / (2.0 * m.q - 2.0));
  }
  JointMax jm = joint_max(m, basis, zeta, w, s0, Eigen::VectorXd::Zero(k));
  auto plus_grad = [&](const JointMax& j) { return project_out(basis, j.ev.grad); };
  Field g = plus_grad(jm);
  Field Pg = project_out(basis, precondition_krylov(m, g, opt.kappa, opt.inner_steps));
  double gPg = inner(g, Pg);
  auto a_plus = [&](const JointMax& j) { return j.s * j.s * quadratic_form(m, w); };
  const double ps0 = a_plus(jm) + jm.ev.e.nonlocal;
  res.ps_ratio = 1.0;
  Window window{{}, static_cast<std::size_t>(std::max(1, opt.memory))};
  window.push(jm.ev.e.J);
  res.energies.push_back(jm.ev.e.J);
  double step = 1.0;
  int increases = 0;

  for (res.iterations = 0;; ++res.iterations) {
    res.grad_norm = std::sqrt(std::max(gPg, 0.0) / a_plus(jm));
    if (opt.trace) opt.trace(res.iterations, jm.ev.e.J, res.grad_norm);
    if (res.grad_norm < opt.grad_tol) {
      res.status = "converged";
      break;
    }
    if (res.iterations >= opt.max_iter) {
      res.status = "max_iter";
      break;
    }
    const Eigen::ArrayXd up = jm.s * w.values;
    double s = step;
    JointMax next;
    Field w_next;
    for (;;) {
      Field trial = w.with_values(up - s * Pg.values);
      const double nt = std::sqrt(inner(trial, trial));
      w_next = trial.with_values(trial.values / nt);
      next = joint_max(m, basis, zeta, w_next, nt, jm.c);
      if (next.ev.e.J <= window.max() - 1e-4 * s * gPg || s <= opt.step_min) break;
      s = std::max(0.5 * s, opt.step_min);
    }
    increases = next.ev.e.J > jm.ev.e.J ? increases + 1 : 0;
    if (increases >= opt.divergence_window)
      throw DivergenceError("reduced energy increased over " + std::to_string(increases) + " consecutive steps");
    const Field g_next = plus_grad(next);
    const Field Pg_next = project_out(basis, precondition_krylov(m, g_next, opt.kappa, opt.inner_steps));
    const Eigen::ArrayXd du = next.s * w_next.values - up;
    const Eigen::ArrayXd dg = g_next.values - g.values;
    const double sy = (du * dg).sum();
    const double yPy = (dg * (Pg_next.values - Pg.values)).sum();
    step = (sy > 0.0 && yPy > 0.0) ? std::clamp(sy / yPy, opt.step_min, opt.step_max) : opt.step_max;

    w = std::move(w_next);
    jm = std::move(next);
    g = g_next;
    Pg = Pg_next;
    gPg = inner(g, Pg);
    res.ps_ratio = std::max(res.ps_ratio, (a_plus(jm) + jm.ev.e.nonlocal) / ps0);
    if (res.ps_ratio > opt.ps_factor) throw DivergenceError("descent trajectory left the bounded PS region");
    window.push(jm.ev.e.J);
    res.energies.push_back(jm.ev.e.J);
  }

  res.u = jm.u;
  res.u.label = "u";
  res.e = jm.ev.e;
  res.coeffs = jm.c;
  res.nehari_residual = std::abs(inner(jm.ev.grad, jm.u)) / a_plus(jm);
  const ReducedPoint rp = reduction_h(m, split, w.with_values(jm.s * w.values));
  res.reduction_residual = rp.residual;
  res.hessian_eigs = rp.hessian_eigs;
  res.level_direct = halfspace_max(m, split, w);
  res.converged = res.status == "converged" && rp.concave && res.nehari_residual < 1e-8;
  finish(m, res);
  // report the reduced level c** = Upsilon(u+) as the energy
  res.e.J = rp.upsilon;
  res.below_threshold = res.e.J < res.threshold;
  return res;
}

LambdaSweep lambda_sweep(const Model& base, const std::vector<double>& lambdas, const Field& init,
                         const SolverOptions& opt) {
  if (lambdas.empty()) throw DomainError("empty lambda list");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw DomainError("lambda list must be increasing");
  LambdaSweep sw;
  const Eigen::ArrayXd omega = zero_set_indicator(base);
  sw.limit = ground_state_limit_problem(base, omega, base.params.beta, init, opt);
  Field start = init;
  const double hN = base.grid->cell_volume();
  for (double lam : lambdas) {
    ProblemParams p = base.params;
    p.lambda = lam;
    const Model m = base.with_params(p);
    LambdaRow row;
    row.lambda = lam;
    row.result = ground_state_definite(m, start, opt);
    row.potential_mass = hN * (base.V * row.result.u.values.square()).sum();
    row.h1_distance = std::sqrt(grad_sq_integral(row.result.u.with_values(row.result.u.values - sw.limit.u.values)));
    if (row.result.converged) start = row.result.u;
    sw.rows.push_back(std::move(row));
  }
  sw.mass_decreasing = sw.distance_decreasing = sw.energy_nondecreasing = true;
  sw.below_limit = true;
  const double slack = 1e-9 * std::abs(sw.limit.e.J);
  const LambdaRow* prev = nullptr;
  for (const LambdaRow& r : sw.rows) {
    if (!r.result.converged) continue;
    if (r.result.e.J > sw.limit.e.J + slack) sw.below_limit = false;
    if (prev) {
      if (!(r.result.mass_outside.value_or(0) < prev->result.mass_outside.value_or(0))) sw.mass_decreasing = false;
      if (!(r.h1_distance < prev->h1_distance)) sw.distance_decreasing = false;
      if (r.result.e.J < prev->result.e.J - slack) sw.energy_nondecreasing = false;
    }
    prev = &r;
  }
  return sw;
}

BetaSweep beta_sweep(const Model& base, const Eigen::ArrayXd& mask, const std::vector<double>& betas,
                     const Field& init, const SolverOptions& opt) {
  if (betas.empty()) throw DomainError("empty beta list");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw DomainError("beta must lie in the open interval (0, beta_1)");
    if (i > 0 && !(betas[i] < betas[i - 1])) throw DomainError("beta list must be decreasing");
  }
  BetaSweep sw;
  sw.c_star = threshold_level(base.params.N, base.params.mu);
  ProblemParams p0 = base.params;
  p0.lambda = 0.0;
  p0.beta = 0.0;
  Model free = base.with_params(p0);
  free.mask.reset();
  Field start = init;
  for (double b : betas) {
    BetaRow row;
    row.beta = b;
    row.result = ground_state_limit_problem(base, mask, b, start, opt);
    if (row.result.status != "zero_collapse") row.t_beta = nehari_project(free, row.result.u).t;
    if (row.result.converged) start = row.result.u;
    sw.rows.push_back(std::move(row));
  }
  sw.reference = ground_state_limit_problem(base, mask, 0.0, start, opt);
  sw.t_converging = sw.gap_decreasing = sw.below_threshold = true;
  sw.grid_gap_decreasing = sw.reference.converged;
  const double ref = sw.reference.e.J;
  const BetaRow* prev = nullptr;
  for (const BetaRow& r : sw.rows) {
    if (!r.result.converged) continue;
    if (!(r.result.e.J < sw.c_star)) sw.below_threshold = false;
    if (!(r.result.e.J < ref)) sw.grid_gap_decreasing = false;
    if (prev) {
      if (!(std::abs(r.t_beta - 1.0) < std::abs(prev->t_beta - 1.0))) sw.t_converging = false;
      if (!(sw.c_star - r.result.e.J < sw.c_star - prev->result.e.J)) sw.gap_decreasing = false;
      if (!(ref - r.result.e.J < ref - prev->result.e.J)) sw.grid_gap_decreasing = false;
    }
    prev = &r;
  }
  return sw;
}

MultiplicityReport multistart_multiplicity(const Model& m, const std::vector<Field>& seeds, double r,
                                           const SolverOptions& opt) {
  MultiplicityReport rep;
  std::vector<int> reps;  // index of the representative solution per cluster
  const Eigen::ArrayXd omega = zero_set_indicator(m);
  rep.barycenters_in_neighbourhood = true;
  for (const Field& seed : seeds) {
    SolveResult s = ground_state_definite(m, seed, opt);
    int cluster = -1;
    if (s.converged) {
      const Point& a = s.truncated_barycenter;
      for (int c = 0; c < static_cast<int>(reps.size()) && cluster < 0; ++c) {
        const SolveResult& o = rep.solutions[reps[c]];
        const double db = (a - o.truncated_barycenter).norm();
        const double dl = std::sqrt(inner(s.u.with_values(s.u.values - o.u.values), s.u.with_values(s.u.values - o.u.values)));
        if (!(db > 0.5 * r && dl > 0.1 * std::sqrt(inner(o.u, o.u)))) cluster = c;
      }
      if (cluster < 0) {
        cluster = static_cast<int>(reps.size());
        reps.push_back(static_cast<int>(rep.solutions.size()));
      }
      // distance from the truncated barycenter to the zero set (grid points)
      double dist = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < omega.size(); ++i)
        if (omega[i] > 0.5) dist = std::min(dist, (m.grid->point(i) - a).norm());
      if (!(dist <= 2.0 * r)) rep.barycenters_in_neighbourhood = false;
    }
    rep.cluster_of.push_back(cluster);
    rep.solutions.push_back(std::move(s));
  }
  rep.clusters = std::max(1, static_cast<int>(reps.size()));
  return rep;
}

}  // namespace choquard
