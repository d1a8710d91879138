// nlslab command-line driver.
//
// Exit status: 0 success, 1 domain/configuration error or failed verdict,
// 2 inconclusive verdict.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nlslab/io.hpp"

using namespace nlslab;
using nlslab::io::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kInconclusive = 2;

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<double> tolerance;
  std::optional<std::string> enforce;
};

io::ExperimentConfig load(const Options& o) {
  io::ExperimentConfig c = o.config.empty() ? io::ExperimentConfig{} : io::load_config(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.tolerance) c.tolerance = *o.tolerance;
  if (o.enforce) c.enforce_hypotheses = *o.enforce == "on";
  return c;
}

void print(const char* key, double v) { std::printf("%-24s %s\n", key, io::format_double(v).c_str()); }
void print(const char* key, const std::string& v) { std::printf("%-24s %s\n", key, v.c_str()); }

NonlinearityParams params(const io::ExperimentConfig& c) {
  return {c.lambda(), c.theta, c.dimension};
}

// Bound subcommands need the amplifying, subcritical-or-critical setting.
void require_bound_hypotheses(const io::ExperimentConfig& c) {
  if (!(c.lambda_im > 0.0))
    throw DomainError("lifespan bound requires Im(lambda) > 0 (got " + io::format_double(c.lambda_im) +
                      ")");
  if (!(c.theta > 0.0 && c.theta <= 1.0))
    throw DomainError("lifespan bound requires 0 < theta <= 1 (got " + io::format_double(c.theta) +
                      ")");
}

double relative_mass_drift(const RunRecord& r) {
  if (r.diagnostics.empty() || r.diagnostics.front().mass == 0.0) return 0.0;
  const double m0 = r.diagnostics.front().mass;
  double worst = 0.0;
  for (const auto& d : r.diagnostics)
    if (std::isfinite(d.mass)) worst = std::max(worst, std::abs(d.mass / m0 - 1.0));
  return worst;
}

void print_record(const RunRecord& r) {
  print("eps", r.eps);
  print("T_eps", r.T_eps);
  print("q_eps", r.invariant_quantity);
  print("bound_value", r.bound_value);
  print("status", r.status);
  print("criterion", r.criterion);
  print("t_pointwise", r.t_pointwise);
  print("t_threshold", r.t_threshold);
  print("t_star", r.t_star);
  print("max_remainder_scaled", r.max_remainder_scaled);
  print("resolution_ok", r.resolution_ok ? "yes" : "no");
  if (r.outside_hypotheses) print("note", "outside theorem hypotheses");
  print("l2_drift", relative_mass_drift(r));
  print("steps", static_cast<double>(r.steps));
  print("fingerprint", r.fingerprint);
}

int cmd_simulate(const io::ExperimentConfig& c) {
  auto rec = simulate(io::solver_config(c, c.eps), io::initial_data(c), io::run_fingerprint(c, c.eps));
  print_record(rec);
  io::OutputDir out(c.output_dir);
  out.write_json(io::OutputDir::run_file_name(rec), io::to_json(rec));
  out.write_summary({rec});
  return kOk;
}

int cmd_sweep(const io::ExperimentConfig& c) {
  require_bound_hypotheses(c);
  if (c.theta >= 1.0) throw DomainError("sweep compares against the 0 < theta < 1 bound");
  auto summary = sweep(c.eps_ladder, io::solver_config(c, c.eps_ladder.front()), io::initial_data(c),
                       c.tolerance, c.jobs, [&](double e) { return io::run_fingerprint(c, e); });
  io::OutputDir out(c.output_dir);
  for (const auto& r : summary.records) out.write_json(io::OutputDir::run_file_name(r), io::to_json(r));
  auto csv = out.write_summary(summary.records);
  out.write_json("summary.json", io::to_json(summary));

  std::vector<io::CsvRow> rows;
  for (const auto& r : summary.records) rows.push_back(io::csv_row(r));
  io::write_csv(std::cout, rows);
  std::cout << "bound_value " << io::format_double(summary.bound_value) << "\n"
            << "min_q " << io::format_double(summary.min_q) << "\n"
            << "d0_estimate " << io::format_double(summary.d0_estimate) << "\n"
            << "verdict " << to_string(summary.verdict) << "\n";
  std::cerr << "wrote " << csv.string() << "\n";
  switch (summary.verdict) {
    case Verdict::Pass: return kOk;
    case Verdict::Fail: return kDomainError;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kDomainError;
}

int cmd_bounds(const io::ExperimentConfig& c) {
  require_bound_hypotheses(c);
  auto phi_hat = fourier_forward(io::initial_data(c));
  const double sup = sup_modulus(phi_hat);
  json j{{"schema_version", io::kSchemaVersion}, {"kind", "bounds"}, {"sup_phi_hat", sup}};
  print("sup_phi_hat", sup);
  if (c.theta < 1.0) {
    auto b = theoretical_bound(phi_hat, params(c), c.s, c.eps > 0.0 ? c.eps : nan());
    print("tau0", b.tau0);
    print("bound_value", b.bound_value);
    print("tau1", b.tau1);
    print("gamma", *b.gamma);
    if (b.t_star) print("t_star", *b.t_star);
    j["tau0"] = b.tau0;
    j["bound_value"] = b.bound_value;
    j["tau1"] = b.tau1;
    j["gamma"] = *b.gamma;
    if (b.t_star) j["t_star"] = *b.t_star;
  } else {
    const double cb = critical_bound_from_sup(sup, c.dimension, c.lambda());
    const double T = critical_heuristic_time(c.eps * sup, c.dimension, c.lambda());
    print("critical_bound", cb);
    print("critical_T", T);
    j["critical_bound"] = cb;
    j["critical_T"] = io::detail::number(T);
  }
  if (outside_theorem_hypotheses(c.dimension, c.theta)) print("note", "outside theorem hypotheses");
  io::OutputDir(c.output_dir).write_json("bounds.json", j);
  return kOk;
}

int cmd_profile_ode(const io::ExperimentConfig& c) {
  using namespace nlslab::profile;
  const auto& o = c.ode;
  OdeParams probe(o.a, o.b, c.lambda(), 1.0, o.t_star, o.psi0_sup, o.sigma);
  auto constants = lemma_constants(probe, o.C1, o.C2);
  const double eps_max = admissible_eps_max(probe, constants, o.delta);
  OdeParams p = probe.with_eps(o.eps ? *o.eps : eps_max);
  const double height = o.psi0_sup;
  auto psi0 = [height](double xi) { return cplx{height * std::exp(-0.5 * xi * xi), 0.0}; };
  RhoShape shape = o.shape == "zero" ? RhoShape::Zero
                   : o.shape == "worst_sign" ? RhoShape::WorstSign
                                             : RhoShape::Oscillatory;
  auto pert = make_perturbation(shape, p, o.C1, o.C2, o.delta, psi0, o.omega);
  auto traj = integrate_perturbed(p, pert, psi0, o.xi_samples, std::numeric_limits<double>::infinity(),
                                  static_cast<std::size_t>(o.time_samples));
  const double sup0 = sup_bound_check(p, psi0, o.xi_samples);
  const double bound = (traj.constants.C0 + 1.0) * p.eps();
  const bool ok = !traj.failure && traj.sup_eta <= bound;

  print("q", p.q());
  print("tau1", p.tau1());
  print("eps", p.eps());
  print("eps_max", eps_max);
  print("horizon", traj.t_end);
  print("C0", traj.constants.C0);
  print("C3", traj.constants.C3);
  print("M", traj.constants.M);
  print("sup_eta0_over_eps", sup0);
  print("sup_eta", traj.sup_eta);
  print("sup_w", traj.sup_w);
  print("bound_C0_plus_1_eps", bound);
  print("max_gronwall_ratio", traj.max_gronwall_ratio);
  if (traj.failure) print("failure", *traj.failure);
  print("verdict", ok ? "PASS" : "FAIL");

  io::OutputDir out(c.output_dir);
  std::ostringstream csv;
  traj.write_csv(csv);
  out.write("profile_trajectory.csv", csv.str());
  out.write_json("profile.json",
                 {{"schema_version", io::kSchemaVersion},
                  {"kind", "profile_ode"},
                  {"q", p.q()},
                  {"tau1", p.tau1()},
                  {"eps", p.eps()},
                  {"eps_max", eps_max},
                  {"horizon", traj.t_end},
                  {"C0", traj.constants.C0},
                  {"C3", traj.constants.C3},
                  {"M", traj.constants.M},
                  {"sup_eta0_over_eps", sup0},
                  {"sup_eta", traj.sup_eta},
                  {"sup_w", traj.sup_w},
                  {"max_gronwall_ratio", traj.max_gronwall_ratio},
                  {"failure", traj.failure ? *traj.failure : ""},
                  {"verdict", ok ? "PASS" : "FAIL"}});
  return ok ? kOk : kDomainError;
}

int cmd_diagnostics(const io::ExperimentConfig& c) {
  auto cfg = io::solver_config(c, c.eps);
  const auto& prm = cfg.params;
  const double gamma = remainder_gamma(c.s, c.dimension);
  std::ostringstream csv;
  csv << "t,r1,r2,r3,remainder_scaled,sigma_s,l_inf,mass\n";
  double r1_max = 0.0, r2_max = 0.0, r3_max = 0.0;
  auto cell = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
  auto observer = [&](const SolverState& st) {
    if (!st.u.all_finite()) return;
    auto r = lemma_diagnostics(st, c.s, gamma, prm);
    auto nr = norms(st.u, st.t, c.s);
    double rem = st.t > 0.0 && prm.lambda() != cplx{0.0, 0.0}
                     ? scaled_remainder(extract_profile(st, prm), c.theta, gamma)
                     : nan();
    if (r.r1) r1_max = std::max(r1_max, *r.r1);
    if (r.r2) r2_max = std::max(r2_max, *r.r2);
    if (r.r3) r3_max = std::max(r3_max, *r.r3);
    csv << io::format_double(st.t) << ',' << cell(r.r1) << ',' << cell(r.r2) << ',' << cell(r.r3)
        << ',' << io::format_double(rem) << ',' << io::format_double(nr.sigma_s) << ','
        << io::format_double(nr.l_inf) << ',' << io::format_double(nr.l2 * nr.l2) << '\n';
  };
  auto outcome = run_to_blowup(init(cfg, io::initial_data(c)), cfg, observer);
  print("T_eps", outcome.T_eps);
  print("status", to_string(outcome.final_state.status));
  print("max_r1", r1_max);
  print("max_r2", r2_max);
  print("max_r3", r3_max);
  print("max_spectral_tail", outcome.max_spectral_tail);
  io::OutputDir(c.output_dir).write("diagnostics.csv", csv.str());
  return kOk;
}

int cmd_convergence(const io::ExperimentConfig& c) {
  auto cfg = io::solver_config(c, c.eps);
  cfg.t_max = c.convergence_t_end;
  cfg.dt_init = c.convergence_dt;
  auto data = c.data;
  auto rep = convergence_study(cfg, [&](const Grid& g) { return io::initial_data(data, g); },
                               c.convergence_refinements);
  json j{{"schema_version", io::kSchemaVersion}, {"kind", "convergence"}};
  j["dts"] = rep.dts;
  j["temporal_errors"] = rep.temporal_errors;
  j["temporal_orders"] = rep.temporal_orders;
  j["ns"] = rep.ns;
  j["spatial_errors"] = rep.spatial_errors;
  j["spatial_drops"] = rep.spatial_drops;
  for (std::size_t k = 0; k < rep.dts.size(); ++k)
    std::printf("dt %-12s error %s\n", io::format_double(rep.dts[k]).c_str(),
                io::format_double(rep.temporal_errors[k]).c_str());
  for (double o : rep.temporal_orders) print("temporal_order", o);
  for (std::size_t k = 0; k < rep.ns.size(); ++k)
    std::printf("n %-13zu error %s\n", rep.ns[k], io::format_double(rep.spatial_errors[k]).c_str());
  for (double d : rep.spatial_drops) print("spatial_drop", d);
  io::OutputDir(c.output_dir).write_json("convergence.json", j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlslab: lifespan experiments for nonlinear Schrodinger equations"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config, "configuration file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "output directory (overrides output_dir)");
  app.add_option("--jobs", opt.jobs, "parallel runs (overrides jobs)")->check(CLI::PositiveNumber);
  app.add_option("--tolerance", opt.tolerance, "verdict tolerance (overrides tolerance)")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--enforce-hypotheses", opt.enforce, "reject configurations violating the index condition")
      ->check(CLI::IsMember({"on", "off"}));

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const io::ExperimentConfig&);
  };
  const Sub subs[] = {
      {"simulate", "one run to blow-up at eps", cmd_simulate},
      {"sweep", "eps ladder against the lifespan lower bound", cmd_sweep},
      {"profile-ode", "perturbed profile ODE against its a priori bound", cmd_profile_ode},
      {"bounds", "theoretical lifespan constants for the configured data", cmd_bounds},
      {"diagnostics", "lemma ratios and remainder along one run", cmd_diagnostics},
      {"convergence", "temporal and spatial self-convergence", cmd_convergence},
  };
  int (*selected)(const io::ExperimentConfig&) = nullptr;
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->callback([&, run = s.run] { selected = run; });
  bool print_config = false;
  app.add_subcommand("print-config", "print the effective configuration with defaults")
      ->callback([&] { print_config = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kDomainError;
  }

  try {
    auto cfg = load(opt);
    if (print_config) {
      std::cout << io::annotated(cfg);
      return kOk;
    }
    return selected(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kDomainError;
}
