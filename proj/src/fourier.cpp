#include "choquard/fourier.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace choquard {

namespace detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

namespace {

using GridKey = std::tuple<int, int, double>;

GridKey key_of(const TensorGrid& g) { return {g.dim(), g.n(), g.half_width()}; }

Eigen::Index half_size(const TensorGrid& g) { return g.size() / g.n() * (g.n() / 2 + 1); }

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// Plans are made with FFTW_UNALIGNED so that they can run on Eigen storage.
const PlanPair& plans_for(const TensorGrid& g) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(detail::fftw_planner_mutex());
  auto [it, fresh] = cache.try_emplace({g.dim(), g.n()});
  if (fresh) {
    std::vector<int> dims(g.dim(), g.n());
    Eigen::ArrayXd real(g.size());
    Eigen::ArrayXcd cplx(half_size(g));
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    it->second.forward = fftw_plan_dft_r2c(g.dim(), dims.data(), real.data(), c, flags);
    it->second.backward = fftw_plan_dft_c2r(g.dim(), dims.data(), c, real.data(), flags | FFTW_DESTROY_INPUT);
  }
  return it->second;
}

template <class Build>
const Eigen::ArrayXd& cached_table(std::map<GridKey, Eigen::ArrayXd>& cache, std::mutex& m,
                                   const TensorGrid& g, Build&& build) {
  std::lock_guard lock(m);
  auto [it, fresh] = cache.try_emplace(key_of(g));
  if (fresh) it->second = build();
  return it->second;
}

int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace

Spectrum fourier_forward(const Field& f) {
  if (!f.grid) throw GridMismatch("field without grid");
  if (f.size() != f.grid->size()) throw GridMismatch("field size does not match its grid");
  const PlanPair& p = plans_for(*f.grid);
  Spectrum s{f.grid, Eigen::ArrayXcd(half_size(*f.grid))};
  Eigen::ArrayXd in = f.values;
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(s.coeffs.data()));
  return s;
}

Field fourier_backward(const Spectrum& s) {
  if (!s.grid) throw GridMismatch("spectrum without grid");
  if (s.coeffs.size() != half_size(*s.grid)) throw GridMismatch("spectrum shape does not match its grid");
  const PlanPair& p = plans_for(*s.grid);
  Eigen::ArrayXcd work = s.coeffs;
  Eigen::ArrayXd out(s.grid->size());
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(work.data()), out.data());
  out /= static_cast<double>(s.grid->size());
  return Field(s.grid, std::move(out));
}

const Eigen::ArrayXd& spectrum_multiplicity(const TensorGrid& g) {
  static std::map<GridKey, Eigen::ArrayXd> cache;
  static std::mutex m;
  return cached_table(cache, m, g, [&] {
    const int last = g.n() / 2 + 1;
    Eigen::ArrayXd mult(half_size(g));
    for (Eigen::Index k = 0; k < mult.size(); ++k) {
      const int j = static_cast<int>(k % last);
      mult[k] = (j == 0 || j == g.n() / 2) ? 1.0 : 2.0;
    }
    return mult;
  });
}

const Eigen::ArrayXd& wave_number_sq(const TensorGrid& g) {
  static std::map<GridKey, Eigen::ArrayXd> cache;
  static std::mutex m;
  return cached_table(cache, m, g, [&] {
    const int n = g.n();
    const int last = n / 2 + 1;
    const double unit = std::numbers::pi / g.half_width();
    Eigen::ArrayXd k2(half_size(g));
    for (Eigen::Index k = 0; k < k2.size(); ++k) {
      Eigen::Index rest = k;
      const double kl = unit * static_cast<double>(rest % last);
      rest /= last;
      double acc = kl * kl;
      for (int a = 0; a < g.dim() - 1; ++a) {
        const double ka = unit * signed_mode(static_cast<int>(rest % n), n);
        acc += ka * ka;
        rest /= n;
      }
      k2[k] = acc;
    }
    return k2;
  });
}

const Eigen::ArrayXd& band_symbol(const TensorGrid& g) {
  static std::map<GridKey, Eigen::ArrayXd> cache;
  static std::mutex m;
  return cached_table(cache, m, g, [&] {
    const double kmax = std::numbers::pi / g.spacing();
    return Eigen::ArrayXd((wave_number_sq(g) <= kmax * kmax * (1.0 + 1e-12)).cast<double>());
  });
}

Field band_limit(const Field& f) {
  Spectrum s = fourier_forward(f);
  s.coeffs *= band_symbol(*f.grid);
  Field out = fourier_backward(s);
  out.label = f.label;
  return out;
}

double spectral_l2_sq(const Spectrum& s) {
  const TensorGrid& g = *s.grid;
  return g.cell_volume() / static_cast<double>(g.size()) * (spectrum_multiplicity(g) * s.coeffs.abs2()).sum();
}

Field apply_symbol(const Field& f, const std::function<double(double)>& symbol_of_k2) {
  Spectrum s = fourier_forward(f);
  s.coeffs *= wave_number_sq(*f.grid).unaryExpr(symbol_of_k2);
  Field out = fourier_backward(s);
  out.label = f.label;
  return out;
}

Field laplacian(const Field& f) {
  Spectrum s = fourier_forward(f);
  s.coeffs *= -wave_number_sq(*f.grid);
  Field out = fourier_backward(s);
  out.label = f.label;
  return out;
}

std::vector<Field> spectral_gradient(const Field& f) {
  const TensorGrid& g = *f.grid;
  const Spectrum s = fourier_forward(f);
  const int n = g.n();
  const int last = n / 2 + 1;
  const double unit = std::numbers::pi / g.half_width();
  std::vector<Field> out;
  for (int axis = 0; axis < g.dim(); ++axis) {
    Spectrum d{s.grid, s.coeffs};
    // stride of `axis` inside the half-complex layout
    Eigen::Index stride = 1;
    int len = last;
    if (axis < g.dim() - 1) {
      stride = last;
      for (int a = g.dim() - 2; a > axis; --a) stride *= n;
      len = n;
    }
    for (Eigen::Index k = 0; k < d.coeffs.size(); ++k) {
      const int i = static_cast<int>((k / stride) % len);
      const int m = axis < g.dim() - 1 ? signed_mode(i, n) : i;
      d.coeffs[k] *= (std::abs(m) == n / 2) ? std::complex<double>(0.0) : std::complex<double>(0.0, unit * m);
    }
    out.push_back(fourier_backward(d));
  }
  return out;
}

}  // namespace choquard
