#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

namespace detail {
/// FFTW planning is not thread-safe; every planner call takes this lock.
std::mutex& fftw_planner_mutex();
}  // namespace detail

/// Half-complex spectrum of a real field on a TensorGrid (FFTW r2c layout:
/// n^{N-1} x (n/2+1), unnormalised forward transform).
struct Spectrum {
  std::shared_ptr<const TensorGrid> grid;
  Eigen::ArrayXcd coeffs;
};

Spectrum fourier_forward(const Field& f);
/// Inverse of fourier_forward; the round trip is the identity up to rounding.
Field fourier_backward(const Spectrum& s);

/// Multiplicity of each stored coefficient in the full spectrum (1 or 2),
/// used for Parseval sums over the half-complex layout.
const Eigen::ArrayXd& spectrum_multiplicity(const TensorGrid& g);
/// |k|^2 for each stored coefficient, k = pi m / L with m in [-n/2, n/2).
const Eigen::ArrayXd& wave_number_sq(const TensorGrid& g);

/// Indicator of |k| <= pi/h (the ball inscribed in the frequency cube).
const Eigen::ArrayXd& band_symbol(const TensorGrid& g);
/// Projection onto modes with |k| <= pi/h.
Field band_limit(const Field& f);

/// h^N / n^N * sum |F_k|^2, equal to integrate(f^2) by Parseval.
double spectral_l2_sq(const Spectrum& s);

/// Multiply the spectrum by a real symbol of |k|^2.
Field apply_symbol(const Field& f, const std::function<double(double)>& symbol_of_k2);
Field laplacian(const Field& f);
/// Gradient components by spectral differentiation (Nyquist mode dropped).
std::vector<Field> spectral_gradient(const Field& f);

}  // namespace choquard
