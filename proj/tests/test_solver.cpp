#include <gtest/gtest.h>

#include <cmath>

#include "nlslab/lifespan.hpp"
#include "nlslab/solver.hpp"

using namespace nlslab;
using namespace std::complex_literals;

namespace {

ComplexField gaussian(const Grid& g, double width = 1.0) {
  return sample_physical(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dimension(); ++a) r2 += x[a] * x[a];
    return cplx{std::exp(-r2 / (2.0 * width * width)), 0.0};
  });
}

SolverConfig config(cplx lambda, double eps, Grid g = Grid(1, 256, 16.0), double theta = 0.5) {
  SolverConfig cfg{g, NonlinearityParams(lambda, theta, g.dimension())};
  cfg.eps = eps;
  return cfg;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mass(const ComplexField& u) { return std::pow(l2_norm(u), 2); }

}  // namespace

TEST(Init, ScalesInitialData) {
  auto cfg = config(1i, 0.1);
  auto st = init(cfg, gaussian(cfg.grid));
  EXPECT_DOUBLE_EQ(sup_modulus(st.u), 0.1);
  ASSERT_EQ(st.diagnostics.size(), 1u);
  const double phi_norm = norms(gaussian(cfg.grid), 0.0, cfg.s).sigma_s;
  EXPECT_NEAR(st.energy / (0.1 * phi_norm), 1.0, 1e-12);
  EXPECT_EQ(st.status, RunStatus::Running);
}

TEST(Init, ZeroAmplitudeStaysZero) {
  auto cfg = config(1i, 0.0);
  auto st = init(cfg, gaussian(cfg.grid));
  for (int k = 0; k < 10; ++k) st = step(st, 0.1, cfg);
  EXPECT_EQ(sup_modulus(st.u), 0.0);
  EXPECT_EQ(st.status, RunStatus::Running);
}

TEST(Init, RejectsBadConfigurations) {
  auto cfg = config(1i, 0.1);
  cfg.s = 0.4;
  EXPECT_NO_THROW(init(cfg, gaussian(cfg.grid)));
  cfg.enforce_hypotheses = true;
  EXPECT_THROW(init(cfg, gaussian(cfg.grid)), ConfigError);
  cfg.s = 1.2;
  EXPECT_NO_THROW(init(cfg, gaussian(cfg.grid)));

  auto other = config(1i, 0.1);
  EXPECT_THROW(init(other, gaussian(Grid(1, 128, 16.0))), ConfigError);
  other.dt_safety = 1.5;
  EXPECT_THROW(init(other, gaussian(other.grid)), ConfigError);
  auto nan_phi = gaussian(other.grid);
  nan_phi[3] = cplx{std::nan(""), 0.0};
  EXPECT_THROW(init(config(1i, 0.1), nan_phi), ConfigError);
}

TEST(Step, LinearLimitIsExactFreeFlow) {
  for (int d : {1, 2}) {
    Grid g(d, d == 1 ? 256 : 64, 16.0);
    auto cfg = config(0.0, 1.0, g);
    auto phi = gaussian(g);
    auto st = evolve_fixed(init(cfg, phi), 0.05, 2.0, cfg);
    EXPECT_LT(max_abs_diff(st.u, free_propagate(phi, 2.0)), 1e-12) << "d=" << d;
  }
}

TEST(Step, RealCouplingConservesMass) {
  for (cplx lambda : {cplx{1.0, 0.0}, cplx{-1.0, 0.0}}) {
    auto cfg = config(lambda, 1.0);
    auto st = init(cfg, gaussian(cfg.grid));
    const double m0 = mass(st.u);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      st = step(st, 0.01, cfg);
      worst = std::max(worst, std::abs(mass(st.u) / m0 - 1.0));
    }
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(Step, MassBalanceResidualIsSecondOrder) {
  // d|u|_2^2/dt = 2 Im(lambda) |u|_{p+1}^{p+1}; integrate the right side by
  // the trapezoid rule along the run and compare with the mass gain.
  auto cfg = config(1i, 0.3);
  auto residual = [&](double dt) {
    auto st = init(cfg, gaussian(cfg.grid));
    const double m0 = mass(st.u);
    const double q = cfg.params.p() + 1.0;
    double integral = 0.0, prev = lq_norm_pow(st.u, q);
    while (st.t < 2.0 - 1e-12) {
      st = step(st, dt, cfg);
      double cur = lq_norm_pow(st.u, q);
      integral += 0.5 * dt * (prev + cur);
      prev = cur;
    }
    return std::abs(mass(st.u) - m0 - 2.0 * cfg.params.mu() * integral);
  };
  const double r1 = residual(0.04), r2 = residual(0.02), r3 = residual(0.01);
  EXPECT_NEAR(r1 / r2, 4.0, 0.5);
  EXPECT_NEAR(r2 / r3, 4.0, 0.5);
}

TEST(Step, AmplifyingCouplingGrowsMass) {
  auto cfg = config(1i, 0.2);
  auto st = init(cfg, gaussian(cfg.grid));
  double prev = mass(st.u);
  for (int k = 0; k < 200; ++k) {
    st = step(st, 0.02, cfg);
    double m = mass(st.u);
    EXPECT_GE(m, prev);
    prev = m;
  }
}

TEST(Step, PointwiseBlowupStopsAtEarliestZero) {
  auto cfg = config(1i, 2.0);
  auto st = init(cfg, gaussian(cfg.grid));
  // The exact flow at amplitude 2 blows up at 1/(b mu |z|^b) = 1/2.
  auto next = step(st, 1.5, cfg);
  EXPECT_EQ(next.status, RunStatus::BlownUp);
  EXPECT_EQ(next.criterion, BlowupCriterion::Pointwise);
  EXPECT_NEAR(next.t_event, 0.5, 1e-12);
  EXPECT_THROW(step(next, 0.1, cfg), UsageError);
  EXPECT_THROW(step(st, 0.0, cfg), UsageError);
}

TEST(Run, DissipativeCouplingIsCensored) {
  auto cfg = config(-1i, 0.4, Grid(1, 1024, 80.0));
  cfg.t_max = 10.0;
  auto out = run_to_blowup(init(cfg, gaussian(cfg.grid)), cfg);
  EXPECT_TRUE(out.censored);
  EXPECT_EQ(out.final_state.status, RunStatus::ReachedTMax);
  EXPECT_DOUBLE_EQ(out.T_eps, 10.0);
}

TEST(Run, TimesAreMonotoneAndStateFreezes) {
  auto cfg = config(1i, 0.4, Grid(1, 1024, 40.0));
  auto out = run_to_blowup(init(cfg, gaussian(cfg.grid)), cfg);
  ASSERT_EQ(out.final_state.status, RunStatus::BlownUp);
  const auto& dg = out.final_state.diagnostics;
  for (std::size_t i = 1; i < dg.size(); ++i) EXPECT_GE(dg[i].t, dg[i - 1].t);
  EXPECT_GE(out.T_eps, out.final_state.t);
  EXPECT_THROW(step(out.final_state, 0.01, cfg), UsageError);
  EXPECT_TRUE(std::isfinite(out.t_threshold) || std::isfinite(out.t_pointwise));
}

TEST(Run, BoundaryContaminationIsDetected) {
  auto cfg = config(1i, 0.15, Grid(1, 256, 8.0));
  auto out = run_to_blowup(init(cfg, gaussian(cfg.grid)), cfg);
  EXPECT_TRUE(out.contaminated);
  EXPECT_EQ(out.final_state.status, RunStatus::BoundaryContaminated);
}

TEST(Run, Deterministic) {
  auto cfg = config(1i, 0.4, Grid(1, 1024, 40.0));
  auto a = simulate(cfg, gaussian(cfg.grid), "x");
  auto b = simulate(cfg, gaussian(cfg.grid), "x");
  EXPECT_EQ(a.T_eps, b.T_eps);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.invariant_quantity, b.invariant_quantity);
  ASSERT_EQ(a.diagnostics.size(), b.diagnostics.size());
  for (std::size_t i = 0; i < a.diagnostics.size(); ++i) {
    EXPECT_EQ(a.diagnostics[i].t, b.diagnostics[i].t);
    EXPECT_EQ(a.diagnostics[i].norms.sigma_s, b.diagnostics[i].norms.sigma_s);
  }
}

TEST(Run, LifespanShrinksWithStrongerAmplification) {
  Grid g(1, 1024, 40.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double mu : {0.5, 1.0, 2.0}) {
    auto cfg = config(cplx{0.0, mu}, 0.4, g);
    auto out = run_to_blowup(init(cfg, gaussian(g)), cfg);
    ASSERT_FALSE(out.censored || out.contaminated);
    EXPECT_LT(out.T_eps, prev);
    prev = out.T_eps;
  }
}

TEST(Convergence, LinearFlowHasNoTemporalError) {
  auto cfg = config(0.0, 1.0, Grid(1, 64, 16.0));
  cfg.t_max = 1.0;
  cfg.dt_init = 0.1;
  auto rep = convergence_study(cfg, [](const Grid& g) { return gaussian(g); }, 2);
  for (double e : rep.temporal_errors) EXPECT_LT(e, 1e-13);
}

TEST(Convergence, StrangOrderAndSpectralAccuracy) {
  auto cfg = config(1.0, 1.0, Grid(1, 64, 16.0));
  cfg.t_max = 1.0;
  cfg.dt_init = 0.1;
  auto rep = convergence_study(cfg, [](const Grid& g) { return gaussian(g); }, 2);
  ASSERT_EQ(rep.temporal_orders.size(), 2u);
  for (double o : rep.temporal_orders) {
    EXPECT_GE(o, 1.8);
    EXPECT_LE(o, 2.2);
  }
  EXPECT_GE(rep.temporal_errors[0] / rep.temporal_errors[1], 3.5);
  EXPECT_LE(rep.temporal_errors[0] / rep.temporal_errors[1], 4.5);
  EXPECT_GT(rep.spatial_drops.at(0), 1e3) << rep.spatial_errors[0] << " " << rep.spatial_errors[1];
}
