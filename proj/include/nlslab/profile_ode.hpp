#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/ode.hpp"
#include "nlslab/propagators.hpp"

namespace nlslab::profile {

/// Parameters of i eta' = lambda t^{-a} |eta|^b eta on [t_*, ...).
class OdeParams {
 public:
  OdeParams(double a, double b, cplx lambda, double eps, double t_star, double psi0_sup,
            double sigma)
      : a_(a), b_(b), lambda_(lambda), eps_(eps), t_star_(t_star), psi0_sup_(psi0_sup),
        sigma_(sigma) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("profile ODE requires 0 < a < 1");
    if (!(b > 0.0)) throw DomainError("profile ODE requires b > 0");
    if (!(lambda.imag() > 0.0)) throw DomainError("profile ODE requires Im(lambda) > 0");
    if (!(eps > 0.0)) throw DomainError("profile ODE requires eps > 0");
    if (!(t_star > 0.0)) throw DomainError("profile ODE requires t_* > 0");
    if (!(psi0_sup > 0.0)) throw DomainError("profile ODE requires sup|psi_0| > 0");
    if (!(sigma > 0.0 && sigma < tau1()))
      throw DomainError("profile ODE requires 0 < sigma < tau_1");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  cplx lambda() const { return lambda_; }
  double mu() const { return lambda_.imag(); }
  double eps() const { return eps_; }
  double t_star() const { return t_star_; }
  double psi0_sup() const { return psi0_sup_; }
  double sigma() const { return sigma_; }

  double q() const { return b_ / (2.0 * (1.0 - a_)); }
  /// 1/tau_1 = (2 q Im(lambda) Psi_0^b)^{1/(1-a)}
  double tau1() const {
    return 1.0 / std::pow(2.0 * q() * mu() * std::pow(psi0_sup_, b_), 1.0 / (1.0 - a_));
  }
  /// sigma eps^{-2q}: end of the window on which eta_0 stays O(eps).
  double horizon() const { return sigma_ * std::pow(eps_, -2.0 * q()); }

  OdeParams with_eps(double e) const { return {a_, b_, lambda_, e, t_star_, psi0_sup_, sigma_}; }
  OdeParams with_sigma(double s) const { return {a_, b_, lambda_, eps_, t_star_, psi0_sup_, s}; }

 private:
  double a_, b_;
  cplx lambda_;
  double eps_, t_star_, psi0_sup_, sigma_;
};

/// Explicit constants of the perturbed a priori bound.
struct LemmaConstants {
  double C0 = 0.0;
  double C3 = 0.0;
  double M = 0.0;
};

inline LemmaConstants lemma_constants(const OdeParams& p, double C1, double C2) {
  LemmaConstants c;
  const double a = p.a(), b = p.b();
  c.C0 = p.psi0_sup() / std::pow(1.0 - std::pow(p.sigma() / p.tau1(), 1.0 - a), 1.0 / b);
  c.C3 = 2.0 * std::abs(p.lambda()) * (b + 1.0) * std::pow(2.0 * c.C0 + 1.0, b) + 0.5;
  c.M = 2.0 * std::sqrt(C1 * C1 + C2 * C2 / (2.0 * c.C3)) *
        std::exp(c.C3 * std::pow(p.sigma(), 1.0 - a) / (2.0 * (1.0 - a)));
  return c;
}

namespace detail {
// 1 + k t_*^{1-a} - k t^{1-a} with k = 2 q Im(lambda) |psi_0|^b eps^b.
inline double eta0_denominator(double t, double psi0_abs, const OdeParams& p) {
  const double k = 2.0 * p.q() * p.mu() * std::pow(psi0_abs * p.eps(), p.b());
  return 1.0 + k * std::pow(p.t_star(), 1.0 - p.a()) - k * std::pow(t, 1.0 - p.a());
}

// G(e0 + w) - G(e0) with G(z) = |z|^b z, written so that it keeps full
// relative accuracy when |w| << |e0|:
//   |e0+w|^b w + (|e0+w|^b - |e0|^b) e0,
//   |e0+w|^b / |e0|^b = exp((b/2) log1p((2 Re(conj(e0) w) + |w|^2) / |e0|^2)).
inline cplx power_difference(cplx e0, cplx w, double b) {
  const double n0 = std::norm(e0);
  if (n0 == 0.0) return std::pow(std::abs(w), b) * w;
  const double rel = (2.0 * (std::conj(e0) * w).real() + std::norm(w)) / n0;
  const double g = 0.5 * b * std::log1p(rel);
  const double m0 = std::pow(n0, 0.5 * b);
  return m0 * std::exp(g) * w + m0 * std::expm1(g) * e0;
}
}  // namespace detail

/// |eta_0(t)| from the closed form; nullopt once the denominator is <= 0.
inline std::optional<double> eta0_modulus_closed_form(double t, double psi0_abs,
                                                      const OdeParams& p) {
  if (t < p.t_star()) throw UsageError("eta0_modulus_closed_form: t < t_*");
  const double den = detail::eta0_denominator(t, psi0_abs, p);
  if (den <= 0.0) return std::nullopt;
  return p.eps() * psi0_abs * std::pow(den, -1.0 / p.b());
}

/// Complex eta_0(t) including the phase advanced by -Re(lambda) \int t^{-a}|eta_0|^b.
inline std::optional<cplx> eta0_closed_form(double t, cplx psi0, const OdeParams& p) {
  if (t < p.t_star()) throw UsageError("eta0_closed_form: t < t_*");
  const double den = detail::eta0_denominator(t, std::abs(psi0), p);
  if (den <= 0.0) return std::nullopt;
  const double modulus_factor = std::pow(den, -1.0 / p.b());
  const double phase = (p.lambda().real() / (p.b() * p.mu())) * std::log(den);
  return p.eps() * psi0 * modulus_factor * std::polar(1.0, phase);
}

/// Time at which the closed-form denominator vanishes (infinite for psi0 = 0).
inline double eta0_blowup_time(double psi0_abs, const OdeParams& p) {
  if (psi0_abs <= 0.0) return std::numeric_limits<double>::infinity();
  const double k = 2.0 * p.q() * p.mu() * std::pow(psi0_abs * p.eps(), p.b());
  return std::pow(std::pow(p.t_star(), 1.0 - p.a()) + 1.0 / k, 1.0 / (1.0 - p.a()));
}

/// Sample times on [t0, t1], uniform in t^{1-a} (the ODE's natural clock).
inline std::vector<double> sample_times(double t0, double t1, std::size_t count, double a) {
  std::vector<double> ts;
  if (count == 0) return ts;
  if (count == 1 || !(t1 > t0)) return {t0};
  const double s0 = std::pow(t0, 1.0 - a), s1 = std::pow(t1, 1.0 - a);
  for (std::size_t i = 0; i < count; ++i) {
    double s = s0 + (s1 - s0) * static_cast<double>(i) / static_cast<double>(count - 1);
    ts.push_back(i == 0 ? t0 : (i + 1 == count ? t1 : std::pow(s, 1.0 / (1.0 - a))));
  }
  return ts;
}

/// max over (t, xi) samples in [t_*, sigma eps^{-2q}] of |eta_0| / eps.
inline double sup_bound_check(const OdeParams& p, const std::function<cplx(double)>& psi0,
                              const std::vector<double>& xi_samples, std::size_t time_samples = 200) {
  const double t_end = std::max(p.t_star(), p.horizon());
  double best = 0.0;
  for (double t : sample_times(p.t_star(), t_end, time_samples, p.a())) {
    for (double xi : xi_samples) {
      auto m = eta0_modulus_closed_form(t, std::abs(psi0(xi)), p);
      if (!m) return std::numeric_limits<double>::infinity();
      best = std::max(best, *m / p.eps());
    }
  }
  return best;
}

/// Numerical integration of the unperturbed equation for one initial value,
/// reported at the requested times (which must be >= t_* and increasing).
inline std::vector<cplx> integrate_unperturbed(const OdeParams& p, cplx psi0,
                                               const std::vector<double>& times,
                                               ode::Tolerances tol = {1e-11, 1e-300}) {
  const cplx lam = p.lambda();
  const double a = p.a(), b = p.b();
  auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
    dy[0] = cplx{0.0, -1.0} * lam * std::pow(t, -a) * std::pow(std::abs(y[0]), b) * y[0];
  };
  ode::Dopri5 solver(tol);
  ode::State y{p.eps() * psi0};
  double t = p.t_star(), h = 0.0;
  std::vector<cplx> out;
  for (double ts : times) {
    y = solver.integrate(rhs, t, y, ts, h);
    t = std::max(t, ts);
    out.push_back(y[0]);
  }
  return out;
}

/// Admissible perturbation: |psi1| <= C1 eps^{1+delta} and
/// |rho(t, xi)| <= C2 eps^{1+b+delta} / t^a. rho may read the current eta.
struct PerturbationSpec {
  std::function<cplx(double xi)> psi1;
  std::function<cplx(double t, double xi, cplx eta)> rho;
  double C1 = 0.0;
  double C2 = 0.0;
  double delta = 0.0;
};

enum class RhoShape { Zero, Oscillatory, WorstSign };

inline const char* to_string(RhoShape s) {
  switch (s) {
    case RhoShape::Zero: return "zero";
    case RhoShape::Oscillatory: return "oscillatory";
    case RhoShape::WorstSign: return "worst_sign";
  }
  return "unknown";
}

/// Library of perturbations saturating the admissible envelopes.
///
/// Zero: psi1 = 0, rho = 0. Oscillatory: psi1 = C1 eps^{1+delta},
/// rho = C2 eps^{1+b+delta} t^{-a} e^{i omega t}. WorstSign: psi1 aligned with
/// psi0 and rho = i |rho|_max eta/|eta|, the direction that maximizes d|eta|/dt.
inline PerturbationSpec make_perturbation(RhoShape shape, const OdeParams& p, double C1, double C2,
                                          double delta, std::function<cplx(double)> psi0 = {},
                                          double omega = 1.0) {
  PerturbationSpec spec;
  spec.C1 = C1;
  spec.C2 = C2;
  spec.delta = delta;
  const double e1 = C1 * std::pow(p.eps(), 1.0 + delta);
  const double e2 = C2 * std::pow(p.eps(), 1.0 + p.b() + delta);
  const double a = p.a();
  switch (shape) {
    case RhoShape::Zero:
      spec.psi1 = [](double) { return cplx{0.0, 0.0}; };
      spec.rho = [](double, double, cplx) { return cplx{0.0, 0.0}; };
      break;
    case RhoShape::Oscillatory:
      spec.psi1 = [e1](double) { return cplx{e1, 0.0}; };
      spec.rho = [e2, a, omega](double t, double, cplx) {
        return e2 * std::pow(t, -a) * std::polar(1.0, omega * t);
      };
      break;
    case RhoShape::WorstSign:
      spec.psi1 = [e1, psi0](double xi) {
        cplx base = psi0 ? psi0(xi) : cplx{1.0, 0.0};
        return std::abs(base) > 0.0 ? e1 * base / std::abs(base) : cplx{e1, 0.0};
      };
      spec.rho = [e2, a](double t, double, cplx eta) {
        cplx dir = std::abs(eta) > 0.0 ? eta / std::abs(eta) : cplx{1.0, 0.0};
        return cplx{0.0, 1.0} * e2 * std::pow(t, -a) * dir;
      };
      break;
  }
  return spec;
}

struct TrajectoryPoint {
  double t = 0.0;
  double xi = 0.0;
  cplx eta;
  double eta0_abs = 0.0;
  double w_abs = 0.0;
  /// |w|^2 + C2^2/(2 C3) eps^{2+2 delta}
  double f = 0.0;
  /// f(t_*) exp(\int_{t_*}^t C3 eps^b tau^{-a} dtau)
  double gronwall_rhs = 0.0;
};

struct ProfileTrajectory {
  std::vector<TrajectoryPoint> points;
  LemmaConstants constants;
  double t_end = 0.0;
  double sup_eta = 0.0;
  double sup_w = 0.0;
  /// Largest f / gronwall_rhs over the samples.
  double max_gronwall_ratio = 0.0;
  std::optional<std::string> failure;

  /// CSV: t, xi, Re eta, Im eta, |eta_0|, |w|, f
  void write_csv(std::ostream& os) const {
    os << "t,xi,re_eta,im_eta,abs_eta0,abs_w,f\n";
    os.precision(17);
    for (const auto& p : points)
      os << p.t << ',' << p.xi << ',' << p.eta.real() << ',' << p.eta.imag() << ','
         << p.eta0_abs << ',' << p.w_abs << ',' << p.f << '\n';
  }
};

/// Largest eps for which the perturbed a priori bound is stated.
inline double admissible_eps_max(const OdeParams& p, const LemmaConstants& c, double delta) {
  return std::min({1.0, std::pow(p.sigma(), -1.0 / p.q()), std::pow(c.M, -1.0 / delta)});
}

/// Integrates w = eta - eta_0 for each xi sample on [t_*, min(t_bar, sigma eps^{-2q})]:
///   i w' = lambda t^{-a} (G(eta_0 + w) - G(eta_0)) + rho,  w(t_*) = psi1,
/// where G(z) = |z|^b z and eta_0 is the closed form.
inline ProfileTrajectory integrate_perturbed(const OdeParams& p, const PerturbationSpec& pert,
                                             const std::function<cplx(double)>& psi0,
                                             const std::vector<double>& xi_samples,
                                             double t_bar = std::numeric_limits<double>::infinity(),
                                             std::size_t time_samples = 100,
                                             ode::Tolerances tol = {1e-10, 1e-300}) {
  ProfileTrajectory traj;
  traj.constants = lemma_constants(p, pert.C1, pert.C2);
  const auto& c = traj.constants;
  const double eps = p.eps(), a = p.a(), b = p.b(), delta = pert.delta;
  if (eps > admissible_eps_max(p, c, delta) * (1.0 + 1e-12))
    throw DomainError("integrate_perturbed: eps exceeds min{1, sigma^{-1/q}, M^{-1/delta}}");

  traj.t_end = std::min(t_bar, p.horizon());
  if (!(traj.t_end > p.t_star()))
    throw DomainError("integrate_perturbed: empty time window (horizon <= t_*)");
  const double psi1_max = pert.C1 * std::pow(eps, 1.0 + delta) * (1.0 + 1e-12);
  const double rho_scale = pert.C2 * std::pow(eps, 1.0 + b + delta) * (1.0 + 1e-12);
  const double f_floor = pert.C2 * pert.C2 / (2.0 * c.C3) * std::pow(eps, 2.0 + 2.0 * delta);
  const cplx lam = p.lambda();
  auto times = sample_times(p.t_star(), traj.t_end, time_samples, a);

  for (double xi : xi_samples) {
    const cplx psi = psi0(xi);
    const cplx w0 = pert.psi1(xi);
    if (std::abs(w0) > psi1_max)
      throw DomainError("integrate_perturbed: psi1 exceeds C1 eps^{1+delta}");

    auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
      auto e0 = eta0_closed_form(t, psi, p);
      if (!e0) throw ode::IntegrationFailure("unperturbed profile blew up inside window", t);
      cplx eta = *e0 + y[0];
      cplx r = pert.rho(t, xi, eta);
      if (std::abs(r) > rho_scale * std::pow(t, -a))
        throw DomainError("integrate_perturbed: rho exceeds C2 eps^{1+b+delta} t^{-a}");
      dy[0] = cplx{0.0, -1.0} * (lam * std::pow(t, -a) * detail::power_difference(*e0, y[0], b) + r);
    };

    ode::Dopri5 solver(tol);
    ode::State w{w0};
    double t = p.t_star(), h = 0.0;
    const double f_start = std::norm(w0) + f_floor;
    for (double ts : times) {
      try {
        w = solver.integrate(rhs, t, w, ts, h);
      } catch (const ode::IntegrationFailure& e) {
        traj.failure = std::string(e.what()) + " at t=" + std::to_string(e.t) +
                       " xi=" + std::to_string(xi);
        return traj;
      }
      t = std::max(t, ts);
      TrajectoryPoint pt;
      pt.t = ts;
      pt.xi = xi;
      cplx e0 = *eta0_closed_form(ts, psi, p);
      pt.eta = e0 + w[0];
      pt.eta0_abs = std::abs(e0);
      pt.w_abs = std::abs(w[0]);
      pt.f = std::norm(w[0]) + f_floor;
      pt.gronwall_rhs = f_start * std::exp(c.C3 * std::pow(eps, b) *
                                           (std::pow(ts, 1.0 - a) - std::pow(p.t_star(), 1.0 - a)) /
                                           (1.0 - a));
      traj.sup_eta = std::max(traj.sup_eta, std::abs(pt.eta));
      traj.sup_w = std::max(traj.sup_w, pt.w_abs);
      traj.max_gronwall_ratio = std::max(traj.max_gronwall_ratio, pt.f / pt.gronwall_rhs);
      traj.points.push_back(pt);
    }
  }
  return traj;
}

}  // namespace nlslab::profile
