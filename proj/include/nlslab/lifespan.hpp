#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/bounds.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/propagators.hpp"
#include "nlslab/solver.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// N(u) = lambda |u|^{2 theta/d} u applied pointwise.
inline ComplexField apply_nonlinearity(const ComplexField& f, const NonlinearityParams& prm) {
  ComplexField out = f;
  for (auto& z : out.values) z = prm.lambda() * g_p(z, prm.p());
  return out;
}

/// Profile A(t) = F[U(t)^{-1} u(t)] and remainder
/// R(t) = F[U(t)^{-1} N(u(t))] - t^{-theta} N(A(t)).
struct Profile {
  double t = 0.0;
  ComplexField A;
  /// Absent at t = 0, where t^{-theta} is undefined.
  std::optional<ComplexField> R;
};

inline Profile extract_profile(const ComplexField& u, double t, const NonlinearityParams& prm) {
  require_space(u, Space::Physical, "extract_profile");
  if (t < 0.0) throw UsageError("extract_profile: t must be nonnegative");
  Profile pr{t, fourier_forward(free_propagate(u, -t)), std::nullopt};
  if (t > 0.0) {
    ComplexField R = fourier_forward(free_propagate(apply_nonlinearity(u, prm), -t));
    const double decay = std::pow(t, -prm.theta());
    for (std::size_t i = 0; i < R.size(); ++i)
      R[i] -= decay * prm.lambda() * g_p(pr.A[i], prm.p());
    pr.R = std::move(R);
  }
  return pr;
}

inline Profile extract_profile(const SolverState& st, const NonlinearityParams& prm) {
  return extract_profile(st.u, st.t, prm);
}

/// sup_xi |R(t, xi)| t^{theta + gamma}.
inline double scaled_remainder(const Profile& pr, double theta, double gamma) {
  if (!pr.R) return std::numeric_limits<double>::quiet_NaN();
  return sup_modulus(*pr.R) * std::pow(pr.t, theta + gamma);
}

/// Scale-invariant ratios whose boundedness along a run reflects the
/// dispersive and composition estimates. Each is absent when its
/// denominator vanishes or its time weight is undefined.
struct LemmaRatios {
  double t = 0.0;
  /// (1+t)^{d/2} ||u||_inf / ||U(-t)u||_{Sigma^s}
  std::optional<double> r1;
  /// | ||u||_inf - t^{-d/2} ||A||_inf | t^{d/2+gamma} / ||U(-t)u||_{H^{0,s}}
  std::optional<double> r2;
  /// (1+t)^{d(p-1)/2} ||U(-t)N(u)||_{Sigma^s} / ||U(-t)u||_{Sigma^s}^p
  std::optional<double> r3;
};

inline LemmaRatios lemma_diagnostics(const ComplexField& u, double t, double s, double gamma,
                                     const NonlinearityParams& prm) {
  const int d = prm.dimension();
  LemmaRatios out;
  out.t = t;
  auto nu = norms(u, t, s);
  if (nu.sigma_s > 0.0 && std::isfinite(nu.sigma_s))
    out.r1 = std::pow(1.0 + t, d / 2.0) * nu.l_inf / nu.sigma_s;
  if (t > 0.0 && nu.h_0s > 0.0 && std::isfinite(nu.h_0s)) {
    double a_inf = sup_modulus(fourier_forward(free_propagate(u, -t)));
    out.r2 = std::abs(nu.l_inf - std::pow(t, -d / 2.0) * a_inf) * std::pow(t, d / 2.0 + gamma) /
             nu.h_0s;
  }
  if (nu.sigma_s > 0.0 && std::isfinite(nu.sigma_s)) {
    auto nn = norms(apply_nonlinearity(u, prm), t, s);
    out.r3 = std::pow(1.0 + t, d * (prm.p() - 1.0) / 2.0) * nn.sigma_s /
             std::pow(nu.sigma_s, prm.p());
  }
  return out;
}

inline LemmaRatios lemma_diagnostics(const SolverState& st, double s, double gamma,
                                     const NonlinearityParams& prm) {
  return lemma_diagnostics(st.u, st.t, s, gamma, prm);
}

struct RemainderSample {
  double t = 0.0;
  double scaled = 0.0;  // sup|R| t^{theta+gamma}
};

/// Per-run summary.
struct RunRecord {
  double eps = 0.0;
  double T_eps = 0.0;
  bool censored = false;
  bool contaminated = false;
  std::string status;
  std::string criterion;
  double t_pointwise = std::numeric_limits<double>::quiet_NaN();
  double t_threshold = std::numeric_limits<double>::quiet_NaN();
  /// eps^{2 theta/d} T_eps^{1 - theta}
  double invariant_quantity = 0.0;
  double bound_value = std::numeric_limits<double>::quiet_NaN();
  /// T_eps eps^{2 theta/((1-theta) d)}
  double d0_ratio = std::numeric_limits<double>::quiet_NaN();
  double t_star = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  /// sup over samples in [t_*, T_eps/2] of sup_xi |R| t^{theta+gamma}.
  double max_remainder_scaled = std::numeric_limits<double>::quiet_NaN();
  /// Same quantity at the first sample with t >= t_*.
  double remainder_at_t_star = std::numeric_limits<double>::quiet_NaN();
  std::size_t remainder_window_samples = 0;
  /// First sampled time at which the spectral tail exceeded tolerance.
  double t_underresolved = std::numeric_limits<double>::quiet_NaN();
  bool resolution_ok = true;
  bool outside_hypotheses = false;
  std::string fingerprint;
  int dimension = 1;
  double theta = 0.0;
  std::size_t n = 0;
  double L = 0.0;
  std::size_t steps = 0;
  std::vector<DiagnosticSample> diagnostics;
  std::vector<RemainderSample> remainder;
};

inline double invariant_quantity(double eps, double T, double theta, int d) {
  return std::pow(eps, 2.0 * theta / d) * std::pow(T, 1.0 - theta);
}

/// Runs one simulation to blow-up and assembles its RunRecord.
inline RunRecord simulate(const SolverConfig& cfg, const ComplexField& phi,
                          const std::string& fingerprint = {}) {
  const auto& prm = cfg.params;
  const double theta = prm.theta();
  const int d = prm.dimension();
  const double gamma = remainder_gamma(cfg.s, d);

  std::vector<RemainderSample> remainder;
  RunObserver observer;
  if (prm.lambda() != cplx{0.0, 0.0}) {
    observer = [&](const SolverState& st) {
      if (st.t < 1.0 || !st.u.all_finite()) return;
      remainder.push_back({st.t, scaled_remainder(extract_profile(st, prm), theta, gamma)});
    };
  }
  auto outcome = run_to_blowup(init(cfg, phi), cfg, observer);

  RunRecord rec;
  rec.eps = cfg.eps;
  rec.T_eps = outcome.T_eps;
  rec.censored = outcome.censored;
  rec.contaminated = outcome.contaminated;
  rec.status = to_string(outcome.final_state.status);
  rec.criterion = to_string(outcome.final_state.criterion);
  rec.t_pointwise = outcome.t_pointwise;
  rec.t_threshold = outcome.t_threshold;
  rec.invariant_quantity = invariant_quantity(cfg.eps, rec.T_eps, theta, d);
  rec.gamma = gamma;
  rec.outside_hypotheses = outside_theorem_hypotheses(d, theta);
  rec.fingerprint = fingerprint;
  rec.dimension = d;
  rec.theta = theta;
  rec.n = cfg.grid.points_per_axis();
  rec.L = cfg.grid.half_width();
  rec.steps = outcome.final_state.steps;
  rec.diagnostics = std::move(outcome.final_state.diagnostics);

  for (const auto& dg : rec.diagnostics) {
    if (dg.spectral_tail >= cfg.spectral_tail_tolerance) {
      rec.t_underresolved = dg.t;
      break;
    }
  }
  rec.resolution_ok = !std::isfinite(rec.t_underresolved) ||
                      rec.t_underresolved >= 0.95 * rec.T_eps;

  if (prm.mu() > 0.0 && theta > 0.0 && theta < 1.0 && cfg.eps > 0.0) {
    auto bound = theoretical_bound(fourier_forward(phi), prm, cfg.s, cfg.eps);
    rec.bound_value = bound.bound_value;
    rec.t_star = *bound.t_star;
    rec.d0_ratio = rec.T_eps * std::pow(cfg.eps, 2.0 * theta / ((1.0 - theta) * d));
    double best = -1.0;
    for (const auto& r : remainder) {
      if (r.t >= rec.t_star && !std::isfinite(rec.remainder_at_t_star))
        rec.remainder_at_t_star = r.scaled;
      if (r.t >= rec.t_star && r.t <= 0.5 * rec.T_eps) {
        best = std::max(best, r.scaled);
        ++rec.remainder_window_samples;
      }
    }
    if (best >= 0.0) rec.max_remainder_scaled = best;
  }
  rec.remainder = std::move(remainder);
  return rec;
}

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

struct SweepSummary {
  std::vector<RunRecord> records;
  /// q_eps per ladder entry (censored and contaminated entries included).
  std::vector<double> q;
  /// Running minimum of q over valid (uncensored, uncontaminated) entries;
  /// NaN until the first valid entry.
  std::vector<double> running_min;
  double bound_value = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.1;
  double min_q = std::numeric_limits<double>::quiet_NaN();
  /// min over valid runs of T_eps eps^{2 theta/((1-theta) d)}
  double d0_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t valid_runs = 0;
  Verdict verdict = Verdict::Inconclusive;
};

inline bool valid_for_bound(const RunRecord& r) { return !r.censored && !r.contaminated; }

/// Folds completed records (in ladder order) into a summary.
inline SweepSummary summarize(std::vector<RunRecord> records, double bound_value, double tolerance) {
  SweepSummary s;
  s.bound_value = bound_value;
  s.tolerance = tolerance;
  double run_min = std::numeric_limits<double>::infinity();
  double d0 = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    s.q.push_back(r.invariant_quantity);
    if (valid_for_bound(r)) {
      ++s.valid_runs;
      run_min = std::min(run_min, r.invariant_quantity);
      d0 = std::min(d0, r.d0_ratio);
    }
    s.running_min.push_back(std::isfinite(run_min) ? run_min
                                                   : std::numeric_limits<double>::quiet_NaN());
  }
  if (s.valid_runs > 0) {
    s.min_q = run_min;
    s.d0_estimate = d0;
    s.verdict = run_min >= bound_value * (1.0 - tolerance) ? Verdict::Pass : Verdict::Fail;
  }
  s.records = std::move(records);
  return s;
}

/// Runs every eps in a strictly decreasing ladder (in parallel up to `jobs`)
/// and compares eps^{2 theta/d} T_eps^{1-theta} against the lower bound.
inline SweepSummary sweep(const std::vector<double>& ladder, const SolverConfig& base,
                          const ComplexField& phi, double tolerance = 0.1, int jobs = 1,
                          const std::function<std::string(double)>& fingerprint = {}) {
  if (ladder.empty()) throw UsageError("sweep: empty eps ladder");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] < ladder[i - 1])) throw UsageError("sweep: ladder must be strictly decreasing");
  for (double e : ladder)
    if (!(e > 0.0)) throw UsageError("sweep: eps must be positive");
  auto bound = theoretical_bound(fourier_forward(phi), base.params, base.s);

  auto run_one = [&](double eps) {
    SolverConfig c = base;
    c.eps = eps;
    return simulate(c, phi, fingerprint ? fingerprint(eps) : std::string{});
  };

  std::vector<RunRecord> records(ladder.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < ladder.size(); start += width) {
    std::vector<std::future<RunRecord>> batch;
    for (std::size_t i = start; i < std::min(ladder.size(), start + width); ++i)
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                 run_one, ladder[i]));
    for (std::size_t i = 0; i < batch.size(); ++i) records[start + i] = batch[i].get();
  }
  return summarize(std::move(records), bound.bound_value, tolerance);
}

}  // namespace nlslab
