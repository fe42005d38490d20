#include "choquard/riesz.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "choquard/fourier.hpp"
#include "choquard/snapshot.hpp"
#include "json.hpp"

namespace choquard {

// ---------------------------------------------------------------------------
// Tensor-grid operator

struct RieszOperator::Buffer {
  explicit Buffer(Eigen::Index n) : data(fftw_alloc_complex(static_cast<std::size_t>(n))) {
    if (!data) throw std::bad_alloc();
  }
  ~Buffer() { fftw_free(data); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  fftw_complex* data;
};

struct RieszOperator::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  std::vector<fftw_plan> forward;   // indexed by axis, axes 0..N-2
  std::vector<fftw_plan> backward;
  ~Plans() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    for (auto p : forward) fftw_destroy_plan(p);
    for (auto p : backward) fftw_destroy_plan(p);
  }
};

namespace {

struct PaddedLayout {
  int dim, n, P;
  std::vector<std::ptrdiff_t> cs;  // complex strides
  std::vector<std::ptrdiff_t> rs;  // real strides (in-place r2c padding)
  Eigen::Index half;

  PaddedLayout(int d, int n_) : dim(d), n(n_), P(2 * n_), cs(d), rs(d) {
    const std::ptrdiff_t last = n + 1;
    cs[d - 1] = 1;
    rs[d - 1] = 1;
    std::ptrdiff_t s = last;
    for (int a = d - 2; a >= 0; --a) {
      cs[a] = s;
      rs[a] = 2 * s;
      s *= P;
    }
    half = s;
  }
};

// Lines of axis `axis` that can be nonzero: earlier axes limited to the unpadded range,
// later ones complete, the half-complex axis always complete.
std::vector<fftw_iodim64> line_loops(const PaddedLayout& L, int axis) {
  std::vector<fftw_iodim64> loops;
  for (int b = 0; b < L.dim - 1; ++b) {
    if (b == axis) continue;
    loops.push_back({b < axis ? L.n : L.P, L.cs[b], L.cs[b]});
  }
  loops.push_back({L.n + 1, 1, 1});
  return loops;
}

}  // namespace

RieszOperator::RieszOperator(std::shared_ptr<const TensorGrid> grid, double mu)
    : grid_(std::move(grid)), mu_(mu), plans_(std::make_unique<Plans>()) {
  if (!grid_) throw GridMismatch("Riesz operator needs a grid");
  const int N = grid_->dim();
  if (!(mu > 0.0 && mu < N)) throw DomainError("Riesz kernel needs 0 < mu < N");
  const int n = grid_->n();
  const PaddedLayout L(N, n);
  half_size_ = L.half;
  const double h = grid_->spacing();
  const double rho = h * std::pow(1.0 / unit_ball_volume(N), 1.0 / N);
  origin_value_ = N / (N - mu) * std::pow(rho, -mu);

  auto work = std::make_unique<Buffer>(half_size_);
  double* re = reinterpret_cast<double*>(work->data);
  fftw_plan full = nullptr;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE;
    std::vector<fftw_iodim64> outer;
    for (int b = 0; b < N - 1; ++b) outer.push_back({n, L.rs[b], L.cs[b]});
    fftw_iodim64 line{L.P, 1, 1};
    plans_->r2c = fftw_plan_guru64_dft_r2c(1, &line, N - 1, outer.data(), re, work->data, flags);
    std::vector<fftw_iodim64> outer_back;
    for (int b = 0; b < N - 1; ++b) outer_back.push_back({n, L.cs[b], L.rs[b]});
    plans_->c2r = fftw_plan_guru64_dft_c2r(1, &line, N - 1, outer_back.data(), work->data, re, flags);
    plans_->forward.resize(std::max(N - 1, 0));
    plans_->backward.resize(std::max(N - 1, 0));
    for (int a = 0; a < N - 1; ++a) {
      const auto loops = line_loops(L, a);
      fftw_iodim64 d{L.P, L.cs[a], L.cs[a]};
      plans_->forward[a] = fftw_plan_guru64_dft(1, &d, static_cast<int>(loops.size()), loops.data(), work->data,
                                                work->data, FFTW_FORWARD, flags);
      plans_->backward[a] = fftw_plan_guru64_dft(1, &d, static_cast<int>(loops.size()), loops.data(), work->data,
                                                 work->data, FFTW_BACKWARD, flags);
    }
    std::vector<int> dims(N, L.P);
    full = fftw_plan_dft_r2c(N, dims.data(), re, work->data, flags);
  }
  if (!plans_->r2c || !plans_->c2r || !full) throw Error("FFTW planning failed");

  // Kernel on the padded grid at minimal-image offsets.
  std::vector<int> idx(N, 0);
  const Eigen::Index lines = half_size_ / (n + 1);
  for (Eigen::Index l = 0; l < lines; ++l) {
    Eigen::Index rest = l;
    double r2_outer = 0.0;
    for (int b = N - 2; b >= 0; --b) {
      const int j = static_cast<int>(rest % L.P);
      rest /= L.P;
      const double d = (j < n ? j : j - L.P) * h;
      r2_outer += d * d;
    }
    double* row = re + 2 * (n + 1) * l;
    for (int j = 0; j < L.P; ++j) {
      const double d = (j < n ? j : j - L.P) * h;
      const double r2 = r2_outer + d * d;
      row[j] = r2 > 0.0 ? std::pow(r2, -0.5 * mu) : origin_value_;
    }
  }
  fftw_execute(full);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(full);
  }
  const double scale = grid_->cell_volume() / std::pow(static_cast<double>(L.P), N);
  kernel_hat_.resize(half_size_);
  for (Eigen::Index k = 0; k < half_size_; ++k) kernel_hat_[k] = work->data[k][0] * scale;
  release(std::move(work));
}

RieszOperator::~RieszOperator() = default;

std::unique_ptr<RieszOperator::Buffer> RieszOperator::acquire() const {
  {
    std::lock_guard lock(pool_mutex_);
    if (!pool_.empty()) {
      auto b = std::move(pool_.back());
      pool_.pop_back();
      return b;
    }
  }
  return std::make_unique<Buffer>(half_size_);
}

void RieszOperator::release(std::unique_ptr<Buffer> b) const {
  std::lock_guard lock(pool_mutex_);
  pool_.push_back(std::move(b));
}

Eigen::ArrayXd RieszOperator::apply(const Eigen::ArrayXd& f) const {
  const TensorGrid& g = *grid_;
  if (f.size() != g.size()) throw GridMismatch("field size does not match the Riesz operator grid");
  require_finite(f, "riesz_convolve");
  const int N = g.dim();
  const int n = g.n();
  const PaddedLayout L(N, n);
  auto buf = acquire();
  double* re = reinterpret_cast<double*>(buf->data);
  std::memset(static_cast<void*>(buf->data), 0, sizeof(fftw_complex) * static_cast<std::size_t>(half_size_));

  // Row-major source lines of length n map to padded rows.
  const Eigen::Index lines = g.size() / n;
  auto padded_row = [&](Eigen::Index l) {
    std::ptrdiff_t off = 0;
    for (int b = N - 2; b >= 0; --b) {
      off += (l % n) * L.rs[b];
      l /= n;
    }
    return off;
  };
  for (Eigen::Index l = 0; l < lines; ++l) std::memcpy(re + padded_row(l), f.data() + l * n, sizeof(double) * n);

  fftw_execute_dft_r2c(plans_->r2c, re, buf->data);
  for (int a = N - 2; a >= 0; --a) fftw_execute_dft(plans_->forward[a], buf->data, buf->data);
  for (Eigen::Index k = 0; k < half_size_; ++k) {
    buf->data[k][0] *= kernel_hat_[k];
    buf->data[k][1] *= kernel_hat_[k];
  }
  for (int a = 0; a < N - 1; ++a) fftw_execute_dft(plans_->backward[a], buf->data, buf->data);
  fftw_execute_dft_c2r(plans_->c2r, buf->data, re);

  Eigen::ArrayXd out(g.size());
  for (Eigen::Index l = 0; l < lines; ++l) std::memcpy(out.data() + l * n, re + padded_row(l), sizeof(double) * n);
  release(std::move(buf));
  return out;
}

Field RieszOperator::apply(const Field& f) const {
  if (!f.grid || (f.grid != grid_ && *f.grid != *grid_)) throw GridMismatch("field is not on the Riesz operator grid");
  return Field(grid_, apply(f.values), f.label);
}

Field riesz_convolve(const RieszOperator& op, const Field& f) { return op.apply(f); }

double double_integral_D(const RieszOperator& op, const Field& u, double q) {
  if (!u.grid || (u.grid != op.grid() && *u.grid != *op.grid())) throw GridMismatch("field is not on the Riesz operator grid");
  const Eigen::ArrayXd uq = u.values.abs().pow(q);
  if (!(uq > 0.0).any()) return 0.0;
  return u.grid->cell_volume() * (uq * op.apply(uq)).sum();
}

double nl_norm(const RieszOperator& op, const Field& u, double q) {
  return std::pow(std::max(double_integral_D(op, u, q), 0.0), 1.0 / (2.0 * q));
}

// ---------------------------------------------------------------------------
// Radial reduction

double RadialRieszTable::profile_quadrature(int dim, double mu, double rho) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double gap = (1.0 - rho) * (1.0 - rho);
  auto integrand = [&](double t, double) {
    const double s = std::sin(0.5 * t);
    const double sin_t = std::sin(t);
    if (sin_t <= 0.0) return 0.0;
    double base = gap + 4.0 * rho * s * s;
    double log_base = base > 1e-280 ? std::log(base) : 2.0 * std::log(s) + std::log(4.0 * rho);
    return std::exp(-0.5 * mu * log_base + (dim - 2) * std::log(sin_t));
  };
  const double z = std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (dim - 1)) / std::tgamma(0.5 * dim);
  return integrator.integrate(integrand, 0.0, std::numbers::pi, 1e-14) / z;
}

RadialRieszTable::RadialRieszTable(int dim, double mu, int nodes) : dim_(dim), mu_(mu) {
  if (dim < 2) throw DomainError("radial Riesz table needs N >= 2");
  if (!(mu > 0.0 && mu < dim - 1))
    throw DomainError("radial Riesz backend needs 0 < mu < N - 1 (finite diagonal of the angular profile)");
  if (nodes < 8) throw DomainError("radial Riesz table needs at least 8 nodes");
  table_.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    const double t = static_cast<double>(k) / (nodes - 1);
    const double rho = 1.0 - std::pow(1.0 - t, 3);
    table_[k] = profile_quadrature(dim, mu, rho);
  }
}

RadialRieszTable::RadialRieszTable(int dim, double mu, Eigen::ArrayXd table)
    : dim_(dim), mu_(mu), table_(std::move(table)) {
  if (!(mu > 0.0 && mu < dim - 1)) throw DomainError("radial Riesz backend needs 0 < mu < N - 1");
  if (table_.size() < 8 || !table_.allFinite() || !(table_ > 0.0).all())
    throw Error("angular profile table is malformed");
}

double RadialRieszTable::profile(double rho) const {
  const Eigen::Index m = table_.size();
  const double x = (1.0 - std::cbrt(std::max(1.0 - rho, 0.0))) * static_cast<double>(m - 1);
  const Eigen::Index i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(x) - 1, 0, m - 4);
  const double s = x - static_cast<double>(i);
  // Lagrange weights on nodes i, i+1, i+2, i+3 at local coordinate s
  const double s0 = s, s1 = s - 1.0, s2 = s - 2.0, s3 = s - 3.0;
  return -s1 * s2 * s3 / 6.0 * table_[i] + s0 * s2 * s3 / 2.0 * table_[i + 1] - s0 * s1 * s3 / 2.0 * table_[i + 2] +
         s0 * s1 * s2 / 6.0 * table_[i + 3];
}

double RadialRieszTable::mean_kernel(double r, double s) const {
  const double hi = std::max(r, s), lo = std::min(r, s);
  if (hi <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(hi, -mu_) * profile(lo / hi);
}

double RadialRieszTable::angular_weight(double r, double s) const {
  return unit_sphere_area(dim_) * mean_kernel(r, s);
}

namespace {

std::filesystem::path cache_stem(int dim, double mu, int nodes) {
  const char* dir = std::getenv("CHOQUARD_CACHE_DIR");
  if (!dir || !*dir) return {};
  std::ostringstream name;
  name.precision(17);
  name << "riesz_profile_N" << dim << "_mu" << mu << "_m" << nodes;
  return std::filesystem::path(dir) / name.str();
}

}  // namespace

std::shared_ptr<const RadialRieszTable> radial_riesz_table(int dim, double mu) {
  static std::mutex m;
  static std::map<std::pair<int, double>, std::shared_ptr<const RadialRieszTable>> tables;
  std::lock_guard lock(m);
  auto& slot = tables[{dim, mu}];
  if (slot) return slot;
  constexpr int kNodes = 8192;
  const auto stem = cache_stem(dim, mu, kNodes);
  const auto bin = std::filesystem::path(stem).concat(".bin");
  std::shared_ptr<const RadialRieszTable> table;
  if (!stem.empty() && std::filesystem::exists(bin)) {
    try {
      table = std::make_shared<RadialRieszTable>(dim, mu, read_raw(bin, kNodes));
    } catch (const Error&) {
      // unreadable cache entry; rebuilt below
    }
  }
  if (!table) {
    table = std::make_shared<RadialRieszTable>(dim, mu, kNodes);
    if (!stem.empty()) {
      std::filesystem::create_directories(stem.parent_path());
      write_raw(bin, table->table());
      nlohmann::json meta = {{"dims", dim},          {"n", kNodes}, {"L", 1.0}, {"kind", "radial_profile"},
                             {"mu", mu},             {"label", "F(rho), rho = 1-(1-t)^3"}};
      std::ofstream(std::filesystem::path(stem).concat(".json")) << meta.dump(2) << '\n';
    }
  }
  slot = table;
  return slot;
}

Eigen::ArrayXd radial_riesz_potential(const RadialRieszTable& table, const RadialGrid& grid, const Eigen::ArrayXd& f) {
  if (table.dim() != grid.dim()) throw GridMismatch("radial table and grid have different dimensions");
  if (f.size() != grid.size()) throw GridMismatch("profile size does not match the radial grid");
  require_finite(f, "radial_riesz_potential");
  const Eigen::ArrayXd& r = grid.nodes();
  const Eigen::ArrayXd wf = grid.weights() * f;
  const Eigen::Index m = r.size();
  const double f1 = table.profile(1.0);
  const double mu = table.mu();
  Eigen::ArrayXd phi = Eigen::ArrayXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (r[i] <= 0.0) continue;
    const double inv = 1.0 / r[i];
    const double ri_mu = std::pow(r[i], -mu);
    double acc = wf[i] * ri_mu * f1;
    const double wfi = wf[i];
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = ri_mu * table.profile(r[j] * inv);
      acc += wf[j] * k;
      phi[j] += wfi * k;
    }
    phi[i] += acc;
  }
  return phi;
}

double double_integral_D(const RadialRieszTable& table, const RadialField& u, double q) {
  const Eigen::ArrayXd uq = u.values.abs().pow(q);
  const Eigen::ArrayXd phi = radial_riesz_potential(table, *u.grid, uq);
  return (u.grid->weights() * uq * phi).sum();
}

double nl_norm(const RadialRieszTable& table, const RadialField& u, double q) {
  return std::pow(std::max(double_integral_D(table, u, q), 0.0), 1.0 / (2.0 * q));
}

}  // namespace choquard
