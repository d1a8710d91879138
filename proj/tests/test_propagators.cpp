#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlslab/ode.hpp"
#include "nlslab/propagators.hpp"

using namespace nlslab;
using namespace std::complex_literals;

namespace {

ComplexField gaussian_field(const Grid& g) {
  return sample_physical(g, [](auto x) { return cplx{std::exp(-0.5 * x[0] * x[0]), 0.0}; });
}

ComplexField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexField f(g, Space::Physical);
  for (auto& v : f.values) v = {nd(rng), nd(rng)};
  return f;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

cplx free_gaussian(double x, double t) {
  cplx z = 1.0 + 1i * t;
  return std::exp(-x * x / (2.0 * z)) / std::sqrt(z);
}

// U(t)phi(x) = (2 pi i t)^{-1/2} \int exp(i (x-y)^2 / 2t) phi(y) dy by
// composite Simpson on [-W, W]; the Gaussian factor makes the tail negligible.
cplx kernel_quadrature(double x, double t) {
  const double W = 12.0;
  const int m = 200000;
  const double h = 2 * W / m;
  cplx acc{0.0, 0.0};
  for (int j = 0; j <= m; ++j) {
    double y = -W + j * h;
    double w = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += w * std::exp(1i * (x - y) * (x - y) / (2.0 * t)) * std::exp(-0.5 * y * y);
  }
  acc *= h / 3.0;
  return acc / std::sqrt(2.0 * std::numbers::pi * 1i * t);
}

}  // namespace

TEST(FreePropagate, IdentityAtZeroAndUnitarity) {
  Grid g(2, 32, 5.0);
  auto f = random_field(g, 4);
  EXPECT_EQ(max_abs_diff(free_propagate(f, 0.0), f), 0.0);
  auto u = free_propagate(f, 3.7);
  EXPECT_NEAR(l2_norm(u) / l2_norm(f), 1.0, 1e-12);
}

TEST(FreePropagate, GroupLaw) {
  Grid g(1, 64, 5.0);
  auto f = random_field(g, 9);
  auto a = free_propagate(free_propagate(f, 0.7), 1.9);
  auto b = free_propagate(f, 2.6);
  EXPECT_LT(max_abs_diff(a, b) / sup_modulus(f), 1e-12);
  auto back = free_propagate(free_propagate(f, 1.4), -1.4);
  EXPECT_LT(max_abs_diff(back, f) / sup_modulus(f), 1e-12);
}

TEST(FreePropagate, AnalyticFormulaMatchesKernelQuadrature) {
  for (double t : {0.5, 2.0, 5.0})
    for (double x : {-3.0, 0.0, 1.7, 6.0})
      EXPECT_LT(std::abs(free_gaussian(x, t) - kernel_quadrature(x, t)), 1e-9)
          << "t=" << t << " x=" << x;
}

TEST(FreePropagate, FreeGaussian) {
  Grid g(1, 512, 40.0);
  auto f = gaussian_field(g);
  for (double t : {0.0, 0.5, 1.0, 2.5, 5.0}) {
    auto u = free_propagate(f, t);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      err = std::max(err, std::abs(u[j] - free_gaussian(g.x(j), t)));
    EXPECT_LT(err, 1e-8) << "t=" << t;
  }
}

TEST(FreePropagate, CommutesWithFourierTransform) {
  Grid g(2, 16, 3.0);
  auto f = random_field(g, 21);
  const double t = 0.9;
  auto a = fourier_forward(free_propagate(f, t));
  auto b = apply_multiplier(fourier_forward(f),
                            [t](auto xi) { return std::polar(1.0, -0.5 * t * (xi[0] * xi[0] + xi[1] * xi[1])); });
  EXPECT_LT(max_abs_diff(a, b) / sup_modulus(a), 1e-12);
}

TEST(Gauge, InverseAndModulus) {
  Grid g(2, 16, 3.0);
  auto f = random_field(g, 13);
  auto m = gauge_multiply(f, 0.7);
  auto back = gauge_multiply(m, 0.7, true);
  EXPECT_LT(max_abs_diff(back, f) / sup_modulus(f), 1e-14);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_NEAR(std::abs(m[i]), std::abs(f[i]), 1e-14 * std::abs(f[i]) + 1e-300);
  EXPECT_THROW(gauge_multiply(f, 0.0), UsageError);
  EXPECT_THROW(gauge_multiply(f, -1.0), UsageError);
}

TEST(Gauge, FactorizationOfWeightedFreeFlow) {
  // U(t)|x|^s U(t)^{-1} f  ==  M(t) (-t^2 Delta)^{s/2} M(t)^{-1} f
  // for even s, where |x|^s is a smooth multiplier.
  Grid g(1, 1024, 40.0);
  auto f = sample_physical(g, [](auto x) {
    return std::exp(-0.5 * (x[0] - 0.4) * (x[0] - 0.4)) * std::polar(1.0, 0.3 * x[0]);
  });
  for (double s : {2.0, 4.0}) {
    for (double t : {0.5, 1.0}) {
      auto lhs = free_propagate(f, -t);
      for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] *= std::pow(g.x_squared(i), s / 2);
      lhs = free_propagate(lhs, t);

      auto rhs = gauge_multiply(f, t, true);
      rhs = apply_multiplier(rhs, [t, s](auto xi) {
        return cplx{std::pow(t * t * xi[0] * xi[0], s / 2), 0.0};
      });
      rhs = gauge_multiply(rhs, t);
      EXPECT_LT(max_abs_diff(lhs, rhs) / sup_modulus(lhs), 1e-6) << "s=" << s << " t=" << t;
    }
  }
}

TEST(Gp, ValuesAndContinuity) {
  EXPECT_EQ(g_p({0.0, 0.0}, 1.5), cplx(0.0, 0.0));
  auto v = g_p({1.0, 1.0}, 3.0);
  EXPECT_NEAR(v.real(), 2.0, 1e-15);
  EXPECT_NEAR(v.imag(), 2.0, 1e-15);
}

TEST(Gp, LipschitzEstimate) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(-3.0, 1.0);
  for (double p : {1.5, 2.0, 2.5, 3.0}) {
    int violations = 0;
    for (int k = 0; k < 100000; ++k) {
      double sz = std::pow(10.0, scale(rng)), sw = std::pow(10.0, scale(rng));
      cplx z{sz * nd(rng), sz * nd(rng)}, w{sw * nd(rng), sw * nd(rng)};
      double lhs = std::abs(g_p(z, p) - g_p(w, p));
      double rhs = p * std::pow(std::abs(z) + std::abs(w), p - 1) * std::abs(z - w);
      if (lhs > rhs * (1 + 1e-12) + 1e-300) ++violations;
    }
    EXPECT_EQ(violations, 0) << "p=" << p;
  }
}

TEST(NonlinearFlow, AmplifyingExample) {
  NonlinearityParams prm(1i, 0.5, 1);  // b = 1
  auto r = nonlinear_flow_exact({1.0, 0.0}, 0.5, prm);
  ASSERT_FALSE(r.blow_up);
  EXPECT_NEAR(std::abs(r.value), 2.0, 1e-14);
  EXPECT_NEAR(std::arg(r.value), 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.horizon, 1.0);
  EXPECT_TRUE(nonlinear_flow_exact({1.0, 0.0}, 1.0, prm).blow_up);
}

TEST(NonlinearFlow, RealCouplingIsPhaseRotation) {
  NonlinearityParams prm({1.0, 0.0}, 0.5, 1);
  cplx z = std::polar(0.8, 0.4);
  auto r = nonlinear_flow_exact(z, 0.3, prm);
  EXPECT_NEAR(std::abs(r.value), 0.8, 1e-15);
  EXPECT_NEAR(std::arg(r.value), 0.4 - 0.8 * 0.3, 1e-14);
  EXPECT_TRUE(std::isinf(r.horizon));
}

TEST(NonlinearFlow, SemigroupAndMonotonicity) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    cplx lam{4 * u(rng) - 2, 4 * u(rng) - 2};
    NonlinearityParams prm(lam, 0.2 + 0.8 * u(rng), 1 + k % 3);
    cplx z = std::polar(0.1 + u(rng), 6.28 * u(rng));
    double horizon = nonlinear_flow_exact(z, 0.0, prm).horizon;
    double total = std::isfinite(horizon) ? 0.9 * horizon * u(rng) : 2 * u(rng);
    double dt1 = total * u(rng), dt2 = total - dt1;
    auto once = nonlinear_flow_exact(z, total, prm);
    auto twice = nonlinear_flow_exact(nonlinear_flow_exact(z, dt1, prm).value, dt2, prm);
    ASSERT_FALSE(once.blow_up);
    EXPECT_LT(std::abs(once.value - twice.value) / std::abs(once.value), 1e-12);

    double m0 = std::abs(z), m1 = std::abs(nonlinear_flow_exact(z, dt1, prm).value);
    if (dt1 > 1e-6) {
      if (lam.imag() > 0) {
        EXPECT_GT(m1, m0);
      } else if (lam.imag() < 0) {
        EXPECT_LT(m1, m0);
      }
    }
  }
  NonlinearityParams flat({0.5, 0.0}, 0.5, 1);
  cplx z{0.3, 0.4};
  EXPECT_NEAR(std::abs(nonlinear_flow_exact(z, 1.3, flat).value), 0.5, 1e-15);
}

TEST(NonlinearFlow, AgreesWithAdaptiveIntegration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    cplx lam{4 * u(rng) - 2, 4 * u(rng) - 2};
    double b = 0.2 + 2.0 * u(rng);
    NonlinearityParams prm(lam, b / 2.0, 1);
    cplx z = std::polar(0.2 + u(rng), 6.28 * u(rng));
    double horizon = nonlinear_flow_exact(z, 0.0, prm).horizon;
    double dt = std::isfinite(horizon) ? 0.8 * horizon * u(rng) : 3 * u(rng);
    auto rhs = [&](double, const ode::State& y, ode::State& dy) {
      dy[0] = -1i * lam * std::pow(std::abs(y[0]), b) * y[0];
    };
    ode::Dopri5 solver({1e-13, 1e-16});
    double h = 0.0;
    auto y = solver.integrate(rhs, 0.0, ode::State{z}, dt, h);
    auto exact = nonlinear_flow_exact(z, dt, prm).value;
    EXPECT_LT(std::abs(y[0] - exact) / std::abs(exact), 1e-10) << "draw " << k;
  }
}
