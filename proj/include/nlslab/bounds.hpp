#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nlslab/grid.hpp"
#include "nlslab/propagators.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// Explicit lifespan constants for the amplifying (Im lambda > 0) problem.
struct BoundReport {
  double tau0 = 0.0;
  /// tau0^{1-theta}: the lower bound for eps^{2 theta/d} T_eps^{1-theta}.
  double bound_value = 0.0;
  /// (1-theta) d / (2 theta Im(lambda) sup|phi_hat|^{2 theta/d}); equals
  /// bound_value, kept separately because it is the inverse-linear form.
  double inner_ratio = 0.0;
  double tau1 = 0.0;
  double sup_phi_hat = 0.0;
  std::optional<double> d0_estimate;
  std::optional<double> gamma;
  std::optional<double> t_star;
  std::optional<double> critical_T;
};

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

/// True when d/2 < s < min{2, 1 + 2 theta/d}.
inline bool sobolev_index_admissible(double s, int d, double theta) {
  return d / 2.0 < s && s < std::min(2.0, 1.0 + 2.0 * theta / d);
}

/// Configurations the main lifespan theorem does not cover (d >= 4, or
/// d = 3 with theta <= 3/4) are accepted but flagged.
inline bool outside_theorem_hypotheses(int d, double theta) {
  return d >= 4 || (d == 3 && theta <= 0.75) || theta >= 1.0 || theta <= 0.0;
}

inline void require_amplifying(const NonlinearityParams& params) {
  if (!(params.mu() > 0.0))
    throw DomainError("lifespan bound requires Im(lambda) > 0 (got Im(lambda) = " +
                      std::to_string(params.mu()) + ")");
}

/// gamma = (2s - d)/8.
inline double remainder_gamma(double s, int d) { return (2.0 * s - d) / 8.0; }

/// t_* = eps^{-theta/((1-theta) d)}.
inline double bootstrap_start_time(double eps, double theta, int d) {
  return std::pow(eps, -theta / ((1.0 - theta) * d));
}

/// Evaluates the lifespan lower bound from sup|phi_hat| directly.
inline BoundReport theoretical_bound_from_sup(double sup_phi_hat, const NonlinearityParams& params,
                                              double s = nan(), double eps = nan()) {
  require_amplifying(params);
  const double theta = params.theta();
  const int d = params.dimension();
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError("lifespan bound requires 0 < theta < 1 (got theta = " +
                      std::to_string(theta) + ")");
  if (!(sup_phi_hat > 0.0) || !std::isfinite(sup_phi_hat))
    throw DomainError("lifespan bound requires 0 < sup|phi_hat| < infinity");
  BoundReport r;
  r.sup_phi_hat = sup_phi_hat;
  r.inner_ratio = (1.0 - theta) * d /
                  (2.0 * theta * params.mu() * std::pow(sup_phi_hat, 2.0 * theta / d));
  r.tau0 = std::pow(r.inner_ratio, 1.0 / (1.0 - theta));
  r.bound_value = std::pow(r.tau0, 1.0 - theta);

  // Profile-ODE blow-up scale with a = theta, b = 2 theta/d, Psi_0 = sup|phi_hat|.
  const double a = theta, b = params.b();
  const double q = b / (2.0 * (1.0 - a));
  r.tau1 = 1.0 / std::pow(2.0 * q * params.mu() * std::pow(sup_phi_hat, b), 1.0 / (1.0 - a));

  if (std::isfinite(s)) r.gamma = remainder_gamma(s, d);
  if (std::isfinite(eps) && eps > 0.0) r.t_star = bootstrap_start_time(eps, theta, d);
  return r;
}

inline BoundReport theoretical_bound(const ComplexField& phi_hat, const NonlinearityParams& params,
                                     double s = nan(), double eps = nan()) {
  require_space(phi_hat, Space::Frequency, "theoretical_bound");
  return theoretical_bound_from_sup(sup_modulus(phi_hat), params, s, eps);
}

/// Critical (theta = 1) lower bound for eps^{2/d} log T_eps:
/// d / (2 Im(lambda) sup|phi_hat|^{2/d}).
inline double critical_bound_from_sup(double sup_phi_hat, int d, cplx lambda) {
  if (!(lambda.imag() > 0.0))
    throw DomainError("critical bound requires Im(lambda) > 0");
  if (!(sup_phi_hat > 0.0)) throw DomainError("critical bound requires sup|phi_hat| > 0");
  return d / (2.0 * lambda.imag() * std::pow(sup_phi_hat, 2.0 / d));
}

inline double critical_bound(const ComplexField& phi_hat, int d, cplx lambda) {
  require_space(phi_hat, Space::Frequency, "critical_bound");
  return critical_bound_from_sup(sup_modulus(phi_hat), d, lambda);
}

/// Time at which 1 - (2/d) Im(lambda) (eps |phi_hat(xi)|)^{2/d} log t vanishes,
/// given amplitude = eps |phi_hat(xi)|. Infinite for zero amplitude.
inline double critical_heuristic_time(double amplitude, int d, cplx lambda) {
  if (!(lambda.imag() > 0.0))
    throw DomainError("critical heuristic time requires Im(lambda) > 0");
  if (amplitude <= 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(d / (2.0 * lambda.imag() * std::pow(amplitude, 2.0 / d)));
}

}  // namespace nlslab
