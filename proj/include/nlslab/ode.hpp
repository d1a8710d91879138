#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab::ode {

using State = std::vector<std::complex<double>>;

struct IntegrationFailure : std::runtime_error {
  double t;
  IntegrationFailure(const std::string& what, double at)
      : std::runtime_error(what), t(at) {}
};

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-14;
  std::size_t max_steps = 5'000'000;
  double min_step_ratio = 1e-14;  // min step relative to |t| + 1
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) embedded pair with elementary step-size control.
///
/// rhs(t, y, dydt) fills dydt. Integrates from t0 to t1 (t1 > t0) and
/// returns the state at t1. `h` carries the step size across calls so a
/// trajectory can be sampled without restarting the controller.
class Dopri5 {
 public:
  explicit Dopri5(Tolerances tol = {}) : tol_(tol) {}

  template <class Rhs>
  State integrate(Rhs&& rhs, double t0, State y, double t1, double& h) {
    const std::size_t n = y.size();
    if (!(t1 > t0)) return y;
    k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
    k5_.resize(n); k6_.resize(n); k7_.resize(n); tmp_.resize(n); y5_.resize(n);

    double t = t0;
    if (!(h > 0.0)) h = initial_step(rhs, t0, y, t1);
    rhs(t, y, k1_);
    bool done = false;
    while (!done) {
      if (stats_.accepted + stats_.rejected >= tol_.max_steps)
        throw IntegrationFailure("ode: maximum number of steps exceeded", t);
      double step = h;
      bool last = false;
      if (t + step >= t1) {
        step = t1 - t;
        last = true;
      }
      if (step < tol_.min_step_ratio * (std::abs(t) + 1.0))
        throw IntegrationFailure("ode: step size underflow", t);

      stage(y, step, {a21}, {&k1_}, tmp_);
      rhs(t + c2 * step, tmp_, k2_);
      stage(y, step, {a31, a32}, {&k1_, &k2_}, tmp_);
      rhs(t + c3 * step, tmp_, k3_);
      stage(y, step, {a41, a42, a43}, {&k1_, &k2_, &k3_}, tmp_);
      rhs(t + c4 * step, tmp_, k4_);
      stage(y, step, {a51, a52, a53, a54}, {&k1_, &k2_, &k3_, &k4_}, tmp_);
      rhs(t + c5 * step, tmp_, k5_);
      stage(y, step, {a61, a62, a63, a64, a65}, {&k1_, &k2_, &k3_, &k4_, &k5_}, tmp_);
      rhs(t + step, tmp_, k6_);
      stage(y, step, {b1, 0.0, b3, b4, b5, b6}, {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_}, y5_);
      rhs(t + step, y5_, k7_);

      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> e = step * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] +
                                         e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        double sc = tol_.atol + tol_.rtol * std::max(std::abs(y[i]), std::abs(y5_[i]));
        double r = std::abs(e) / sc;
        if (!std::isfinite(r)) finite = false;
        err = std::max(err, r);
      }

      if (finite && err <= 1.0) {
        t = last ? t1 : t + step;
        y.swap(y5_);
        k1_.swap(k7_);
        ++stats_.accepted;
        done = last;
        double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!last) h = step * fac;
      } else {
        ++stats_.rejected;
        double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
        h = step * fac;
      }
    }
    return y;
  }

  const Stats& stats() const { return stats_; }

 private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (fifth minus fourth order weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  static void stage(const State& y, double h, std::initializer_list<double> coeffs,
                    std::initializer_list<const State*> ks, State& out) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      std::complex<double> acc{0.0, 0.0};
      auto c = coeffs.begin();
      for (auto k = ks.begin(); k != ks.end(); ++k, ++c) acc += *c * (**k)[i];
      out[i] = y[i] + h * acc;
    }
  }

  template <class Rhs>
  double initial_step(Rhs& rhs, double t0, const State& y, double t1) {
    State f0(y.size());
    rhs(t0, y, f0);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double sc = tol_.atol + tol_.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(f0[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min(h0, t1 - t0);
  }

  Tolerances tol_;
  Stats stats_;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y5_;
};

}  // namespace nlslab::ode
