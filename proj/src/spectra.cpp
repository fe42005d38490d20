#include "choquard/spectra.hpp"

#include <random>

#include "choquard/fourier.hpp"

namespace choquard {

namespace {

Eigen::ArrayXd minus_laplacian(const std::shared_ptr<const TensorGrid>& g, const Eigen::ArrayXd& x) {
  Spectrum s = fourier_forward(Field(g, x));
  s.coeffs *= wave_number_sq(*g);
  return fourier_backward(s).values;
}

Eigen::ArrayXd shifted_inverse(const std::shared_ptr<const TensorGrid>& g, const Eigen::ArrayXd& x, double kappa) {
  Spectrum s = fourier_forward(Field(g, x));
  s.coeffs *= (wave_number_sq(*g) + kappa).inverse();
  return fourier_backward(s).values;
}

/// Low-order monomials times a taper, plus a small seeded perturbation.
Eigen::MatrixXd starting_block(const TensorGrid& g, const Eigen::ArrayXd& taper, int cols) {
  const int N = g.dim();
  std::vector<Eigen::ArrayXd> x;
  for (int a = 0; a < N; ++a) x.push_back(g.axis_coordinates(a));
  std::vector<Eigen::ArrayXd> mono{Eigen::ArrayXd::Ones(g.size())};
  for (int a = 0; a < N; ++a) mono.push_back(x[a]);
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b) mono.push_back(x[a] * x[b]);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(g.size(), cols);
  for (int j = 0; j < cols; ++j) {
    Eigen::ArrayXd col = mono[j % mono.size()] * taper;
    if (j >= static_cast<int>(mono.size())) col *= x[j % N];
    const double scale = col.abs().maxCoeff();
    for (Eigen::Index k = 0; k < col.size(); ++k) col[k] += 1e-3 * scale * nd(rng) * taper[k];
    X.col(j) = col.matrix();
  }
  return X;
}

std::vector<Field> to_fields(const std::shared_ptr<const TensorGrid>& g, const Eigen::MatrixXd& X, int k,
                             const std::string& label) {
  const double s = 1.0 / std::sqrt(g->cell_volume());
  std::vector<Field> out;
  for (int j = 0; j < k; ++j) out.emplace_back(g, (s * X.col(j)).array(), label + std::to_string(j + 1));
  return out;
}

}  // namespace

DirichletEigs dirichlet_eigs(std::shared_ptr<const TensorGrid> grid, const Eigen::ArrayXd& mask, int k,
                             const EigenOptions& opt) {
  if (mask.size() != grid->size()) throw GridMismatch("mask size does not match the grid");
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask[i] > 0.5) inside.push_back(i);
  const Eigen::Index nr = static_cast<Eigen::Index>(inside.size());
  const int cols = k + opt.guard;
  if (nr < 3 * cols) throw DomainError("Dirichlet mask has too few grid points");

  auto embed = [&](const Eigen::VectorXd& r) {
    Eigen::ArrayXd full = Eigen::ArrayXd::Zero(grid->size());
    for (Eigen::Index i = 0; i < nr; ++i) full[inside[i]] = r[i];
    return full;
  };
  auto restrict_to = [&](const Eigen::ArrayXd& full, Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < nr; ++i) out[i] = full[inside[i]];
  };
  BlockOperator A = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(in.rows(), in.cols());
    for (Eigen::Index j = 0; j < in.cols(); ++j) restrict_to(minus_laplacian(grid, embed(in.col(j))), out.col(j));
  };
  BlockOperator T = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(in.rows(), in.cols());
    for (Eigen::Index j = 0; j < in.cols(); ++j)
      restrict_to(shifted_inverse(grid, embed(in.col(j)), opt.kappa), out.col(j));
  };

  const Eigen::MatrixXd full_start = starting_block(*grid, mask, cols);
  Eigen::MatrixXd X(nr, cols);
  for (int j = 0; j < cols; ++j) restrict_to(full_start.col(j).array(), X.col(j));

  LobpcgOptions lo;
  lo.nev = k;
  lo.tol = opt.tol;
  lo.max_iter = opt.max_iter;
  const LobpcgResult r = lobpcg(A, T, X, lo);
  if (!r.converged) throw ConvergenceError("Dirichlet eigensolver did not converge within the iteration budget");

  DirichletEigs out;
  out.values = r.values.head(k);
  out.residuals = r.residuals.head(k);
  out.iterations = r.iterations;
  Eigen::MatrixXd full(grid->size(), k);
  for (int j = 0; j < k; ++j) full.col(j) = embed(r.vectors.col(j)).matrix();
  out.fields = to_fields(grid, full, k, "dirichlet_");
  return out;
}

SpectralSplit SpectralSplit::with_beta(double new_beta, double margin) const {
  SpectralSplit s = *this;
  s.zeta.array() += beta - new_beta;
  s.beta = new_beta;
  s.morse_index = static_cast<int>((s.zeta.array() < 0.0).count());
  if ((s.zeta.array().abs() < margin).any())
    throw DegenerateSplit("an eigenvalue of the Schroedinger operator lies within the degeneracy margin of 0");
  if (s.morse_index == s.zeta.size())
    throw DomainError("all computed eigenvalues are negative: request more eigenpairs");
  return s;
}

SpectralSplit schrodinger_eigs(std::shared_ptr<const TensorGrid> grid, const Eigen::ArrayXd& V, double lambda,
                               double beta, int k, double margin, const EigenOptions& opt,
                               const std::vector<Field>& start) {
  if (V.size() != grid->size()) throw GridMismatch("potential size does not match the grid");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const Eigen::ArrayXd lv = lambda * V;
  const Eigen::ArrayXd dscale = (1.0 + lv / opt.kappa).rsqrt();
  BlockOperator A = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(in.rows(), in.cols());
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      const Eigen::ArrayXd x = in.col(j).array();
      out.col(j) = (minus_laplacian(grid, x) + lv * x).matrix();
    }
  };
  auto base_prec = [&](const Eigen::ArrayXd& r) { return Eigen::ArrayXd(dscale * shifted_inverse(grid, dscale * r, opt.kappa)); };
  // a few PCG steps on (L + kappa) z = r; the diagonal scaling alone misjudges high frequencies where lambda V is large
  BlockOperator T = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(in.rows(), in.cols());
    for (Eigen::Index j = 0; j < in.cols(); ++j) {
      const Eigen::ArrayXd r0 = in.col(j).array();
      Eigen::ArrayXd z = base_prec(r0);
      if (opt.inner_steps > 0) {
        Eigen::ArrayXd x = Eigen::ArrayXd::Zero(r0.size()), r = r0, p = z;
        double rz = (r * z).sum();
        for (int s = 0; s < opt.inner_steps && rz > 0.0; ++s) {
          const Eigen::ArrayXd Ap = minus_laplacian(grid, p) + (lv + opt.kappa) * p;
          const double alpha = rz / (p * Ap).sum();
          x += alpha * p;
          r -= alpha * Ap;
          z = base_prec(r);
          const double rz_new = (r * z).sum();
          p = z + (rz_new / rz) * p;
          rz = rz_new;
        }
        z = x;
      }
      out.col(j) = z.matrix();
    }
  };

  const int cols = k + opt.guard;
  Eigen::MatrixXd X = starting_block(*grid, (1.0 + lv).inverse(), cols);
  for (int j = 0; j < std::min<int>(cols, static_cast<int>(start.size())); ++j) {
    if (start[j].size() != grid->size()) throw GridMismatch("starting field is on another grid");
    X.col(j) = start[j].values.matrix();
  }

  LobpcgOptions lo;
  lo.nev = k;
  lo.tol = opt.tol;
  lo.max_iter = opt.max_iter;
  const LobpcgResult r = lobpcg(A, T, X, lo);
  if (!r.converged) throw ConvergenceError("Schroedinger eigensolver did not converge within the iteration budget");

  SpectralSplit s;
  s.lambda = lambda;
  s.beta = 0.0;
  s.zeta = r.values.head(k);
  s.residuals = r.residuals.head(k);
  s.iterations = r.iterations;
  s.fields = to_fields(grid, r.vectors, k, "eigen_");
  return s.with_beta(beta, margin);
}

double subspace_alignment(const Field& phi, const std::vector<Field>& cluster) {
  double acc = 0.0;
  for (const Field& c : cluster) {
    const double p = inner(phi, c);
    acc += p * p;
  }
  return std::sqrt(acc / inner(phi, phi));
}

Field project_plus(const std::vector<Field>& basis, const Field& u) {
  Eigen::ArrayXd v = u.values;
  for (const Field& e : basis) v -= inner(u, e) * e.values;
  return u.with_values(std::move(v));
}

Eigen::MatrixXd directional_hessian(const Model& m, const Field& w, const Eigen::ArrayXd& phi,
                                    const std::vector<Field>& dirs, const Eigen::MatrixXd& quadratic) {
  const double q = m.q;
  const double hN = m.grid->cell_volume();
  const Eigen::Index k = static_cast<Eigen::Index>(dirs.size());
  auto lim = [&](const Field& f) { return m.dealias ? band_limit(f).values : f.values; };
  const Eigen::ArrayXd wb = lim(w);
  const Eigen::ArrayXd wq2 = wb.abs().pow(q - 2.0);
  const Eigen::ArrayXd base = wq2 * wb;
  std::vector<Eigen::ArrayXd> dv, psi, conv;
  for (const Field& d : dirs) {
    dv.push_back(lim(d));
    psi.push_back(base * dv.back());
    conv.push_back(m.riesz->apply(psi.back()));
  }
  Eigen::MatrixXd H(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) {
      const double psi2 = q * hN * (conv[a] * psi[b]).sum();
      const double local = (q - 1.0) * hN * (phi * wq2 * dv[a] * dv[b]).sum();
      H(a, b) = H(b, a) = quadratic(a, b) - psi2 - local;
    }
  return H;
}

ReducedPoint reduction_h(const Model& m, const SpectralSplit& split, const Field& u_plus, double tol, int max_steps) {
  const std::vector<Field> basis = split.negative_basis();
  const int k = static_cast<int>(basis.size());
  if (k == 0) throw DomainError("reduction needs a nontrivial negative subspace (definite regime)");
  if (!(m.params.mu < 4.0)) throw DomainError("reduction needs mu < 4");
  ReducedPoint rp;
  rp.u_plus = project_plus(basis, u_plus);
  rp.coeffs = Eigen::VectorXd::Zero(k);
  const Eigen::MatrixXd quad = split.zeta.head(k).asDiagonal();

  auto assemble = [&](const Eigen::VectorXd& c) {
    Eigen::ArrayXd v = rp.u_plus.values;
    for (int i = 0; i < k; ++i) v += c[i] * basis[i].values;
    return rp.u_plus.with_values(std::move(v));
  };
  auto grad_of = [&](const Evaluation& ev) {
    Eigen::VectorXd g(k);
    for (int i = 0; i < k; ++i) g[i] = inner(ev.grad, basis[i]);
    return g;
  };

  if (!(rp.u_plus.values.abs().maxCoeff() > 0.0)) {
    // h(0) = 0: J(v) = <Lv,v>/2 - D(v)/(2q) < 0 for every nonzero v in E^-
    rp.h = rp.u_plus;
    rp.upsilon = 0.0;
    rp.residual = 0.0;
    rp.hessian_eigs = split.zeta.head(k);
    rp.concave = (rp.hessian_eigs.array() < 0.0).all();
    return rp;
  }

  Field w = assemble(rp.coeffs);
  Evaluation ev = evaluate(m, w);
  Eigen::VectorXd g = grad_of(ev);
  Eigen::MatrixXd H;
  for (rp.newton_steps = 0; rp.newton_steps < max_steps; ++rp.newton_steps) {
    H = directional_hessian(m, w, ev.phi, basis, quad);
    if (g.lpNorm<Eigen::Infinity>() < tol) break;
    Eigen::VectorXd step;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if ((es.eigenvalues().array() < 0.0).all())
      step = -H.ldlt().solve(g);
    else
      step = g / std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());  // ascent fallback
    double damp = 1.0;
    for (int tries = 0; tries < 30; ++tries, damp *= 0.5) {
      const Eigen::VectorXd c = rp.coeffs + damp * step;
      const Field wn = assemble(c);
      Evaluation en = evaluate(m, wn);
      const Eigen::VectorXd gn = grad_of(en);
      // near the maximum the energy gain drops below roundoff; a smaller gradient still counts
      if (en.e.J >= ev.e.J - 1e-14 * std::abs(ev.e.J) || gn.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
        rp.coeffs = c;
        w = wn;
        ev = std::move(en);
        g = gn;
        break;
      }
    }
  }
  rp.h = rp.u_plus.with_values(w.values - rp.u_plus.values);
  rp.upsilon = ev.e.J;
  rp.residual = g.lpNorm<Eigen::Infinity>();
  rp.hessian_eigs = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues();
  rp.concave = (rp.hessian_eigs.array() < 0.0).all();
  return rp;
}

double reduced_energy(const Model& m, const SpectralSplit& split, const Field& u_plus) {
  return reduction_h(m, split, u_plus).upsilon;
}

}  // namespace choquard
