#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/bounds.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/propagators.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// Controls for one split-step run of i u_t + 1/2 Delta u = lambda |u|^{2 theta/d} u.
struct SolverConfig {
  Grid grid;
  NonlinearityParams params;
  double eps = 0.1;
  double s = 1.0;
  double dt_init = 0.05;
  double dt_safety = 0.1;
  /// Sup-norm cap; unset means 10^3 / eps.
  std::optional<double> blowup_norm_threshold{};
  /// Largest L^2-mass fraction allowed in the outer shell max_a |x_a| > 0.9 L.
  double boundary_mass_tolerance = 1e-6;
  double t_max = 100.0;
  bool enforce_hypotheses = false;
  /// Diagnostics are recorded every this many accepted steps.
  int diagnostics_every = 20;
  /// Relative width of the bracket around the final (blow-up) step.
  double blowup_time_rtol = 1e-3;
  double spectral_tail_tolerance = 1e-8;

  double threshold() const {
    if (blowup_norm_threshold) return *blowup_norm_threshold;
    return eps > 0.0 ? 1e3 / eps : std::numeric_limits<double>::infinity();
  }
};

enum class RunStatus { Running, BlownUp, BoundaryContaminated, ReachedTMax };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Running: return "running";
    case RunStatus::BlownUp: return "blown_up";
    case RunStatus::BoundaryContaminated: return "boundary_contaminated";
    case RunStatus::ReachedTMax: return "reached_t_max";
  }
  return "unknown";
}

enum class BlowupCriterion { None, Pointwise, NormThreshold, NonFinite };

inline const char* to_string(BlowupCriterion c) {
  switch (c) {
    case BlowupCriterion::None: return "none";
    case BlowupCriterion::Pointwise: return "pointwise";
    case BlowupCriterion::NormThreshold: return "norm_threshold";
    case BlowupCriterion::NonFinite: return "non_finite";
  }
  return "unknown";
}

struct DiagnosticSample {
  double t = 0.0;
  NormReport norms;
  /// Running sup of ||U(t)^{-1} u(t)||_{Sigma^s} up to and including t.
  double energy = 0.0;
  double mass = 0.0;
  double boundary_fraction = 0.0;
  double spectral_tail = 0.0;
};

struct SolverState {
  double t = 0.0;
  ComplexField u;
  RunStatus status = RunStatus::Running;
  /// Time at which the state left Running (NaN while running).
  double t_event = std::numeric_limits<double>::quiet_NaN();
  BlowupCriterion criterion = BlowupCriterion::None;
  std::vector<DiagnosticSample> diagnostics{};
  double energy = 0.0;
  std::size_t steps = 0;
};

namespace detail {

inline double boundary_mass_fraction(const ComplexField& u) {
  const double cut = 0.9 * u.grid.half_width();
  double outer = 0.0, total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double m = std::norm(u[i]);
    total += m;
    if (u.grid.x_max_abs(i) > cut) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

}  // namespace detail

inline void validate(const SolverConfig& cfg) {
  if (cfg.grid.dimension() != cfg.params.dimension())
    throw ConfigError("grid dimension and nonlinearity dimension differ");
  if (cfg.eps < 0.0) throw ConfigError("eps must be nonnegative");
  if (!(cfg.dt_init > 0.0)) throw ConfigError("dt_init must be positive");
  if (!(cfg.dt_safety > 0.0 && cfg.dt_safety < 1.0))
    throw ConfigError("dt_safety must lie in (0, 1)");
  if (!(cfg.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (cfg.diagnostics_every < 1) throw ConfigError("diagnostics_every must be >= 1");
  if (cfg.enforce_hypotheses &&
      !sobolev_index_admissible(cfg.s, cfg.params.dimension(), cfg.params.theta()))
    throw ConfigError("Sobolev index violates d/2 < s < min{2, 1 + 2 theta/d} (s = " +
                      std::to_string(cfg.s) + ")");
}

inline DiagnosticSample sample_diagnostics(const SolverState& st, const SolverConfig& cfg,
                                           double running_energy) {
  DiagnosticSample d;
  d.t = st.t;
  d.norms = norms(st.u, st.t, cfg.s);
  d.energy = std::max(running_energy, d.norms.sigma_s);
  d.mass = d.norms.l2 * d.norms.l2;
  d.boundary_fraction = detail::boundary_mass_fraction(st.u);
  d.spectral_tail = st.u.all_finite() ? spectral_tail_fraction(fourier_forward(st.u)) : 1.0;
  return d;
}

inline void record_diagnostics(SolverState& st, const SolverConfig& cfg) {
  auto d = sample_diagnostics(st, cfg, st.energy);
  st.energy = d.energy;
  st.diagnostics.push_back(d);
}

/// State at t = 0 with u = eps * phi.
inline SolverState init(const SolverConfig& cfg, const ComplexField& phi) {
  validate(cfg);
  require_space(phi, Space::Physical, "init");
  if (!(phi.grid == cfg.grid)) throw ConfigError("initial data grid differs from solver grid");
  if (!phi.all_finite()) throw ConfigError("initial data is not finite");
  SolverState st{0.0, phi, RunStatus::Running};
  st.u *= cplx{cfg.eps, 0.0};
  record_diagnostics(st, cfg);
  return st;
}

/// One Strang step: half nonlinear flow, full free flow, half nonlinear flow.
/// The nonlinear half-steps use the exact pointwise flow; a pointwise
/// denominator zero stops the run at the earliest such zero.
inline SolverState step(const SolverState& state, double dt, const SolverConfig& cfg) {
  if (state.status != RunStatus::Running) throw UsageError("step: state is not running");
  if (!(dt > 0.0)) throw UsageError("step: dt must be positive");
  SolverState next = state;
  const auto& prm = cfg.params;
  const bool linear = prm.lambda() == cplx{0.0, 0.0};

  auto half_nonlinear = [&](ComplexField& u, double offset) {
    double earliest = std::numeric_limits<double>::infinity();
    for (auto& z : u.values) {
      auto r = nonlinear_flow_exact(z, 0.5 * dt, prm);
      if (r.blow_up) earliest = std::min(earliest, r.horizon);
      else z = r.value;
    }
    if (std::isfinite(earliest)) {
      next.status = RunStatus::BlownUp;
      next.criterion = BlowupCriterion::Pointwise;
      next.t_event = state.t + offset + earliest;
      next.u.blown_up = true;
      return false;
    }
    return true;
  };

  if (!linear && !half_nonlinear(next.u, 0.0)) return next;
  next.u = free_propagate(next.u, dt);
  if (!linear && !half_nonlinear(next.u, 0.5 * dt)) return next;
  next.t = state.t + dt;
  ++next.steps;
  if (!next.u.all_finite()) {
    next.status = RunStatus::BlownUp;
    next.criterion = BlowupCriterion::NonFinite;
    next.t_event = next.t;
    next.u.blown_up = true;
  }
  return next;
}

/// Adaptive step law: dt = c_dt * min(dt_init, 1/(b Im(lambda) ||u||_inf^b)).
inline double adaptive_dt(const SolverState& st, const SolverConfig& cfg) {
  double limit = cfg.dt_init;
  const double mu = cfg.params.mu();
  const double sup = sup_modulus(st.u);
  if (mu > 0.0 && sup > 0.0)
    limit = std::min(limit, 1.0 / (cfg.params.b() * mu * std::pow(sup, cfg.params.b())));
  return cfg.dt_safety * limit;
}

/// Called after every recorded diagnostic sample.
using RunObserver = std::function<void(const SolverState&)>;

/// Raw outcome of run_to_blowup before any bound bookkeeping.
struct RunOutcome {
  SolverState final_state;
  double T_eps = 0.0;
  bool censored = false;
  bool contaminated = false;
  double t_pointwise = std::numeric_limits<double>::quiet_NaN();
  double t_threshold = std::numeric_limits<double>::quiet_NaN();
  double max_spectral_tail = 0.0;
  bool resolution_ok = true;
};

/// Advances with the adaptive law until blow-up (pointwise or sup-norm
/// threshold), boundary contamination, or t_max. The step that crosses a
/// blow-up criterion is bisected down to blowup_time_rtol.
inline RunOutcome run_to_blowup(SolverState state, const SolverConfig& cfg,
                                const RunObserver& observer = {}) {
  validate(cfg);
  const double threshold = cfg.threshold();
  struct {
    double t_pointwise = std::numeric_limits<double>::quiet_NaN();
    double t_threshold = std::numeric_limits<double>::quiet_NaN();
    double max_spectral_tail = 0.0;
  } out;
  // Diagnostics live outside the state while stepping so that candidate
  // steps and bisection copies stay cheap.
  auto diagnostics = std::move(state.diagnostics);
  state.diagnostics.clear();
  auto sample = [&]() {
    auto d = sample_diagnostics(state, cfg, state.energy);
    state.energy = d.energy;
    out.max_spectral_tail = std::max(out.max_spectral_tail, d.spectral_tail);
    diagnostics.push_back(d);
  };
  if (observer) observer(state);

  auto crossed = [&](const SolverState& s) {
    return s.status == RunStatus::BlownUp || sup_modulus(s.u) > threshold;
  };

  while (state.status == RunStatus::Running) {
    double dt = std::min(adaptive_dt(state, cfg), cfg.t_max - state.t);
    const bool final_step = dt >= cfg.t_max - state.t;
    SolverState cand = step(state, dt, cfg);
    if (crossed(cand)) {
      double lo = 0.0, hi = dt;
      SolverState hi_state = cand;
      while (hi - lo > cfg.blowup_time_rtol * hi) {
        double mid = 0.5 * (lo + hi);
        SolverState m = step(state, mid, cfg);
        if (crossed(m)) {
          hi = mid;
          hi_state = std::move(m);
        } else {
          lo = mid;
        }
      }
      if (hi_state.status == RunStatus::BlownUp &&
          hi_state.criterion != BlowupCriterion::NonFinite) {
        out.t_pointwise = hi_state.t_event;
        state.criterion = BlowupCriterion::Pointwise;
      } else if (hi_state.status == RunStatus::BlownUp) {
        state.criterion = BlowupCriterion::NonFinite;
      } else {
        out.t_threshold = state.t + hi;
        state.criterion = BlowupCriterion::NormThreshold;
      }
      // The recorded event time is the bracket's upper end of the crossing step.
      state.status = RunStatus::BlownUp;
      state.t_event = state.t + hi;
      if (state.criterion == BlowupCriterion::Pointwise)
        state.t_event = std::min(state.t_event, out.t_pointwise);
      break;
    }
    state = std::move(cand);
    if (state.steps % static_cast<std::size_t>(cfg.diagnostics_every) == 0) {
      sample();
      if (observer) observer(state);
    }
    if (detail::boundary_mass_fraction(state.u) > cfg.boundary_mass_tolerance) {
      state.status = RunStatus::BoundaryContaminated;
      state.t_event = state.t;
      break;
    }
    if (final_step) {
      state.status = RunStatus::ReachedTMax;
      state.t_event = state.t;
    }
  }

  if (diagnostics.empty() || diagnostics.back().t != state.t) sample();
  state.diagnostics = std::move(diagnostics);
  const double T = state.t_event;
  const bool censored = state.status == RunStatus::ReachedTMax;
  const bool contaminated = state.status == RunStatus::BoundaryContaminated;
  const bool resolved = out.max_spectral_tail < cfg.spectral_tail_tolerance;
  return RunOutcome{std::move(state), T,  censored, contaminated, out.t_pointwise,
                    out.t_threshold,  out.max_spectral_tail, resolved};
}

/// Fixed-step evolution to time t_end (last step shortened to land exactly).
inline SolverState evolve_fixed(SolverState state, double dt, double t_end, const SolverConfig& cfg) {
  while (state.status == RunStatus::Running && state.t < t_end) {
    double h = std::min(dt, t_end - state.t);
    if (t_end - (state.t + h) < 1e-12 * t_end) h = t_end - state.t;
    state = step(state, h, cfg);
    if (std::abs(state.t - t_end) <= 1e-12 * t_end) state.t = t_end;
  }
  return state;
}

struct ConvergenceReport {
  std::vector<double> dts;
  std::vector<double> temporal_errors;
  /// log2 of successive error ratios.
  std::vector<double> temporal_orders;
  std::vector<std::size_t> ns;
  std::vector<double> spatial_errors;
  /// e(n) / e(2n) for successive grid doublings.
  std::vector<double> spatial_drops;
};

namespace detail {
inline double field_l2_distance(const ComplexField& a, const ComplexField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * a.grid.cell_volume());
}

// Restricts a field on a grid with n' = k n points per axis to the coarse
// nodes (same box), which coincide with every k-th fine node.
inline ComplexField restrict_to(const ComplexField& fine, const Grid& coarse) {
  const std::size_t k = fine.grid.points_per_axis() / coarse.points_per_axis();
  ComplexField out(coarse, Space::Physical);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    auto idx = coarse.unflatten(i);
    std::size_t flat = 0;
    for (int a = 0; a < coarse.dimension(); ++a)
      flat = flat * fine.grid.points_per_axis() + idx[a] * k;
    out[i] = fine[flat];
  }
  return out;
}
}  // namespace detail

/// Self-convergence study on [0, cfg.t_max] with fixed steps.
///
/// Temporal: dt_init / 2^k for k = 0..refinements against a dt_init / 2^{refinements+3}
/// reference. Spatial: n, 2n, ..., 2^refinements n against 2^{refinements+1} n at the
/// finest dt. `phi_of_grid` samples the initial data on a given grid.
template <class PhiOfGrid>
ConvergenceReport convergence_study(const SolverConfig& cfg, PhiOfGrid&& phi_of_grid,
                                    int refinements) {
  if (refinements < 1) throw UsageError("convergence_study: need at least one refinement");
  ConvergenceReport rep;
  const double T = cfg.t_max;
  auto run = [&](const SolverConfig& c, double dt) {
    return evolve_fixed(init(c, phi_of_grid(c.grid)), dt, T, c).u;
  };

  const double dt_ref = cfg.dt_init / std::pow(2.0, refinements + 3);
  auto ref = run(cfg, dt_ref);
  for (int k = 0; k <= refinements; ++k) {
    double dt = cfg.dt_init / std::pow(2.0, k);
    rep.dts.push_back(dt);
    rep.temporal_errors.push_back(detail::field_l2_distance(run(cfg, dt), ref));
  }
  for (std::size_t k = 0; k + 1 < rep.temporal_errors.size(); ++k)
    rep.temporal_orders.push_back(std::log2(rep.temporal_errors[k] / rep.temporal_errors[k + 1]));

  const std::size_t n0 = cfg.grid.points_per_axis();
  const int d = cfg.grid.dimension();
  const double L = cfg.grid.half_width();
  const double dt_space = cfg.dt_init / std::pow(2.0, refinements);
  SolverConfig fine_cfg = cfg;
  fine_cfg.grid = Grid(d, n0 << (refinements + 1), L);
  auto fine = run(fine_cfg, dt_space);
  for (int k = 0; k <= refinements; ++k) {
    SolverConfig c = cfg;
    c.grid = Grid(d, n0 << k, L);
    rep.ns.push_back(c.grid.points_per_axis());
    rep.spatial_errors.push_back(
        detail::field_l2_distance(run(c, dt_space), detail::restrict_to(fine, c.grid)));
  }
  for (std::size_t k = 0; k + 1 < rep.spatial_errors.size(); ++k)
    rep.spatial_drops.push_back(rep.spatial_errors[k] / rep.spatial_errors[k + 1]);
  return rep;
}

}  // namespace nlslab
