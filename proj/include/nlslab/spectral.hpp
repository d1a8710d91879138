#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nlslab/fft.hpp"
#include "nlslab/grid.hpp"

namespace nlslab {

namespace detail {

// Flat FFT-order index for every flat monotone index, plus the parity of
// sum_a k_a (the (-1)^k factor from the box starting at x = -L).
struct MonotoneMap {
  std::vector<std::size_t> fft_index;
  std::vector<signed char> sign;
};

inline MonotoneMap monotone_map(const Grid& g) {
  const std::size_t n = g.points_per_axis();
  MonotoneMap map{std::vector<std::size_t>(g.size()), std::vector<signed char>(g.size())};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    auto idx = g.unflatten(flat);
    std::size_t target = 0;
    long ksum = 0;
    for (int a = 0; a < g.dimension(); ++a) {
      std::size_t f = (idx[a] + n / 2) % n;
      target = target * n + f;
      ksum += g.k_of_monotone(idx[a]);
    }
    map.fft_index[flat] = target;
    map.sign[flat] = (ksum % 2 == 0) ? 1 : -1;
  }
  return map;
}

}  // namespace detail

/// Discrete version of the unitary transform
///   Ff(xi) = (2 pi)^{-d/2} \int e^{-i y.xi} f(y) dy
/// on the grid lattice. Output is in monotone-xi order.
inline ComplexField fourier_forward(const ComplexField& f) {
  require_space(f, Space::Physical, "fourier_forward");
  const Grid& g = f.grid;
  std::vector<cplx> work = f.values;
  fft::forward_raw(g, work);
  const double scale = std::pow(g.spacing() / std::sqrt(2.0 * std::numbers::pi), g.dimension());
  auto map = detail::monotone_map(g);
  ComplexField out(g, Space::Frequency);
  for (std::size_t m = 0; m < g.size(); ++m)
    out[m] = (scale * map.sign[m]) * work[map.fft_index[m]];
  out.blown_up = f.blown_up;
  return out;
}

/// Inverse of fourier_forward.
inline ComplexField fourier_inverse(const ComplexField& fhat) {
  require_space(fhat, Space::Frequency, "fourier_inverse");
  const Grid& g = fhat.grid;
  auto map = detail::monotone_map(g);
  std::vector<cplx> work(g.size());
  for (std::size_t m = 0; m < g.size(); ++m)
    work[map.fft_index[m]] = static_cast<double>(map.sign[m]) * fhat[m];
  fft::backward_raw(g, work);
  const double scale =
      std::pow(g.frequency_spacing() / std::sqrt(2.0 * std::numbers::pi), g.dimension());
  for (auto& v : work) v *= scale;
  ComplexField out(g, Space::Physical, std::move(work));
  out.blown_up = fhat.blown_up;
  return out;
}

/// Applies the Fourier multiplier m(xi) to f. Physical input is round-tripped
/// through frequency space and returned physical; frequency input is
/// multiplied in place and returned as frequency.
template <class Multiplier>
ComplexField apply_multiplier(const ComplexField& f, Multiplier&& m) {
  const bool physical = f.space == Space::Physical;
  ComplexField fhat = physical ? fourier_forward(f) : f;
  const Grid& g = f.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx mv = m(g.xi_vector(i));
    if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag()))
      throw NumericalDomainError("apply_multiplier: multiplier is not finite on the lattice");
    fhat[i] *= mv;
  }
  return physical ? fourier_inverse(fhat) : fhat;
}

inline double norm2_squared(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

/// Discrete L^2 norm with the quadrature weight appropriate to f's space.
inline double l2_norm(const ComplexField& f) {
  const double w = f.space == Space::Physical ? f.grid.cell_volume()
                                              : f.grid.frequency_cell_volume();
  return std::sqrt(w * norm2_squared(f.values));
}

/// Discrete L^q norm, physical quadrature.
inline double lq_norm_pow(const ComplexField& f, double q) {
  double s = 0.0;
  for (const auto& z : f.values) s += std::pow(std::abs(z), q);
  return s * f.grid.cell_volume();
}

/// max |value| over the lattice.
inline double sup_modulus(const ComplexField& f) {
  double m = 0.0;
  for (const auto& z : f.values) m = std::max(m, std::abs(z));
  return m;
}

/// Fraction of spectral energy carried by modes with some |k_a| > n/3.
inline double spectral_tail_fraction(const ComplexField& fhat) {
  require_space(fhat, Space::Frequency, "spectral_tail_fraction");
  const Grid& g = fhat.grid;
  const long cut = static_cast<long>(g.points_per_axis() / 3);
  double tail = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double e = std::norm(fhat[i]);
    total += e;
    auto idx = g.unflatten(i);
    for (int a = 0; a < g.dimension(); ++a) {
      if (std::abs(g.k_of_monotone(idx[a])) > cut) {
        tail += e;
        break;
      }
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace nlslab
