#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "nlslab/fft.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// Parameters of the power nonlinearity lambda |u|^{2 theta/d} u.
class NonlinearityParams {
 public:
  NonlinearityParams(cplx lambda, double theta, int d) : lambda_(lambda), theta_(theta), d_(d) {
    if (d < 1) throw UsageError("dimension must be positive");
    if (!(theta > 0.0)) throw UsageError("theta must be positive");
  }

  cplx lambda() const { return lambda_; }
  double theta() const { return theta_; }
  int dimension() const { return d_; }
  double b() const { return 2.0 * theta_ / d_; }
  double p() const { return 1.0 + b(); }
  double mu() const { return lambda_.imag(); }

  NonlinearityParams with_lambda(cplx l) const { return {l, theta_, d_}; }

 private:
  cplx lambda_;
  double theta_;
  int d_;
};

/// G_p(z) = |z|^{p-1} z, continuously extended by G_p(0) = 0.
inline cplx g_p(cplx z, double p) {
  const double r = std::abs(z);
  if (r == 0.0) return {0.0, 0.0};
  return std::pow(r, p - 1.0) * z;
}

/// Free Schrodinger flow U(t) = exp(i t Delta / 2): multiplier exp(-i t |xi|^2 / 2).
inline ComplexField free_propagate(const ComplexField& f, double t) {
  require_space(f, Space::Physical, "free_propagate");
  if (t == 0.0) return f;
  const Grid& g = f.grid;
  std::vector<cplx> work = f.values;
  fft::forward_raw(g, work);
  auto xi2 = fft::xi_squared_fft_order(g);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < work.size(); ++i)
    work[i] *= std::polar(inv_n, -0.5 * t * xi2[i]);
  fft::backward_raw(g, work);
  ComplexField out(g, Space::Physical, std::move(work));
  out.blown_up = f.blown_up;
  return out;
}

/// Pointwise multiplication by M(t) = exp(i|x|^2/2t), or its inverse.
inline ComplexField gauge_multiply(const ComplexField& f, double t, bool inverse = false) {
  require_space(f, Space::Physical, "gauge_multiply");
  if (!(t > 0.0)) throw UsageError("gauge_multiply: t must be positive");
  ComplexField out = f;
  const double sgn = inverse ? -1.0 : 1.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= std::polar(1.0, sgn * f.grid.x_squared(i) / (2.0 * t));
  return out;
}

/// Outcome of the exact pointwise nonlinear substep.
struct FlowResult {
  cplx value;
  bool blow_up = false;
  /// Time from the substep start at which the modulus becomes infinite
  /// (+inf when it never does).
  double horizon = std::numeric_limits<double>::infinity();
};

namespace detail {
// -log(1 - x)/x, continuous at x = 0.
inline double log_ratio(double x) {
  if (std::abs(x) < 1e-8) return 1.0 + 0.5 * x;
  return -std::log1p(-x) / x;
}
}  // namespace detail

/// Exact solution of i w' = lambda |w|^b w, w(0) = z, after time dt >= 0.
///
/// The modulus obeys |w|^{-b} = |z|^{-b} - b mu dt (mu = Im lambda) and the
/// phase advances by -Re(lambda) times the integral of |w|^b.
inline FlowResult nonlinear_flow_exact(cplx z, double dt, const NonlinearityParams& params) {
  const double b = params.b();
  const double mu = params.mu();
  const double r = std::abs(z);
  FlowResult res;
  if (r == 0.0) {
    res.value = {0.0, 0.0};
    return res;
  }
  const double rb = std::pow(r, b);
  if (mu > 0.0) res.horizon = 1.0 / (b * mu * rb);
  const double x = b * mu * rb * dt;
  if (x >= 1.0) {
    res.blow_up = true;
    res.value = {std::numeric_limits<double>::infinity(), 0.0};
    return res;
  }
  const double modulus = r * std::pow(1.0 - x, -1.0 / b);
  const double phase_shift = -params.lambda().real() * rb * dt * detail::log_ratio(x);
  res.value = (modulus / r) * z * std::polar(1.0, phase_shift);
  return res;
}

}  // namespace nlslab
