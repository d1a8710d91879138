#pragma once

#include <cmath>
#include <limits>

#include "nlslab/propagators.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// Norms tracked for a physical-space field at time t.
///
/// h_s0 is ||f||_{H^{s,0}} (frequency weight), h_0s is ||U(t)^{-1} f||_{H^{0,s}}
/// (spatial weight on the back-propagated field), sigma_s their sum.
struct NormReport {
  double l2 = 0.0;
  double l_inf = 0.0;
  double h_s0 = 0.0;
  double h_0s = 0.0;
  double sigma_s = 0.0;
  bool infinite = false;
};

/// Weighted physical L^2 norm ||(1+|x|^2)^{s/2} f||.
inline double weighted_space_norm(const ComplexField& f, double s) {
  require_space(f, Space::Physical, "weighted_space_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    acc += std::pow(1.0 + f.grid.x_squared(i), s) * std::norm(f[i]);
  return std::sqrt(acc * f.grid.cell_volume());
}

/// Weighted frequency L^2 norm ||(1+|xi|^2)^{s/2} fhat||.
inline double weighted_frequency_norm(const ComplexField& fhat, double s) {
  require_space(fhat, Space::Frequency, "weighted_frequency_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < fhat.size(); ++i)
    acc += std::pow(1.0 + fhat.grid.xi_squared(i), s) * std::norm(fhat[i]);
  return std::sqrt(acc * fhat.grid.frequency_cell_volume());
}

inline NormReport norms(const ComplexField& f, double t, double s) {
  require_space(f, Space::Physical, "norms");
  if (s < 0.0) throw UsageError("norms: s must be nonnegative");
  if (t < 0.0) throw UsageError("norms: t must be nonnegative");
  NormReport r;
  if (f.blown_up || !f.all_finite()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    r = {inf, inf, inf, inf, inf, true};
    return r;
  }
  r.l2 = l2_norm(f);
  r.l_inf = sup_modulus(f);
  r.h_s0 = weighted_frequency_norm(fourier_forward(f), s);
  r.h_0s = weighted_space_norm(free_propagate(f, -t), s);
  r.sigma_s = r.h_s0 + r.h_0s;
  return r;
}

}  // namespace nlslab
