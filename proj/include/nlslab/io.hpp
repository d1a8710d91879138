#pragma once

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlslab/lifespan.hpp"
#include "nlslab/profile_ode.hpp"
#include "nlslab/solver.hpp"

namespace nlslab::io {

inline constexpr int kSchemaVersion = 1;

/// Built-in initial data. All shapes are real envelopes times e^{i k.x}.
///   gaussian:       amplitude exp(-|x-c|^2/(2 width^2))
///   super_gaussian: amplitude exp(-(|x-c|/width)^{2 order}/2)
///   bump_sum:       sum_j amplitudes[j] exp(-(x_1-centers[j])^2/(2 widths[j]^2)) exp(-|x'|^2/2)
struct InitialData {
  std::string kind = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  std::vector<double> center{0.0};
  std::vector<double> modulation{0.0};
  double order = 2.0;
  std::vector<double> centers{-2.0, 2.0};
  std::vector<double> widths{1.0, 1.0};
  std::vector<double> amplitudes{1.0, 1.0};

  bool operator==(const InitialData&) const = default;
};

/// Profile ODE experiment; psi_0(xi) = psi0_sup exp(-xi^2/2).
struct OdeSection {
  double a = 0.5;
  double b = 1.0;
  std::optional<double> eps{};  // unset: largest admissible value
  double t_star = 1.0;
  double psi0_sup = 1.0;
  double sigma = 0.125;
  double C1 = 1.0;
  double C2 = 1.0;
  double delta = 4.0;
  std::string shape = "oscillatory";
  double omega = 1.0;
  std::vector<double> xi_samples{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  int time_samples = 100;

  bool operator==(const OdeSection&) const = default;
};

struct ExperimentConfig {
  int dimension = 1;
  int n = 2048;
  double L = 80.0;
  double theta = 0.5;
  double lambda_re = 0.0;
  double lambda_im = 1.0;
  double eps = 0.2;
  std::vector<double> eps_ladder{0.4, 0.3, 0.2, 0.15};
  double s = 1.0;
  double dt_init = 0.05;
  double dt_safety = 0.1;
  std::optional<double> blowup_norm_threshold{};
  double boundary_mass_tolerance = 1e-6;
  double t_max = 100.0;
  bool enforce_hypotheses = false;
  int diagnostics_every = 20;
  double blowup_time_rtol = 1e-3;
  double spectral_tail_tolerance = 1e-8;
  InitialData data{};
  OdeSection ode{};
  int convergence_refinements = 2;
  double convergence_t_end = 1.0;
  double convergence_dt = 0.1;
  std::string output_dir = "out";
  int jobs = 1;
  double tolerance = 0.1;

  cplx lambda() const { return {lambda_re, lambda_im}; }
  bool operator==(const ExperimentConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Value formatting and parsing

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Messages thrown from here are prefixed with the line and key by the parser.
struct ValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double parse_double(const std::string& text) {
  const std::string s = trim(text);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValueError("expected a number, got '" + s + "'");
  return v;
}

inline int parse_int(const std::string& text) {
  const std::string s = trim(text);
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValueError("expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& text) {
  const std::string s = trim(text);
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ValueError("expected on/off, got '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw ValueError("expected a comma-separated list of numbers");
  return out;
}

inline double positive(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValueError("must be positive and finite");
  return v;
}

inline int positive(int v) {
  if (v < 1) throw ValueError("must be >= 1");
  return v;
}

inline double nonnegative(double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValueError("must be nonnegative and finite");
  return v;
}

inline double finite(double v) {
  if (!std::isfinite(v)) throw ValueError("must be finite");
  return v;
}

inline std::string one_of(const std::string& text, std::initializer_list<const char*> allowed) {
  const std::string s = trim(text);
  std::string names;
  for (const char* a : allowed) {
    if (s == a) return s;
    names += names.empty() ? a : std::string("|") + a;
  }
  throw ValueError("expected one of " + names + ", got '" + s + "'");
}

struct Field {
  const char* key;
  const char* doc;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define NLSLAB_FIELD(KEY, DOC, MEMBER, FORMAT, PARSE) \
  Field { KEY, DOC, [](const ExperimentConfig& c) { return FORMAT(c.MEMBER); }, \
          [](ExperimentConfig& c, const std::string& v) { c.MEMBER = PARSE(v); } }

inline std::string format_int(int v) { return std::to_string(v); }
inline std::string format_bool(bool v) { return v ? "on" : "off"; }
inline std::string format_string(const std::string& v) { return v; }
inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : "auto";
}
inline std::optional<double> parse_optional_positive(const std::string& v) {
  if (trim(v) == "auto") return std::nullopt;
  return positive(parse_double(v));
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      NLSLAB_FIELD("dimension", "space dimension d (1, 2 or 3)", dimension, format_int,
                   [](const std::string& v) {
                     int d = parse_int(v);
                     if (d < 1 || d > 3) throw ValueError("must be 1, 2 or 3");
                     return d;
                   }),
      NLSLAB_FIELD("n", "grid points per axis (power of two >= 8)", n, format_int,
                   [](const std::string& v) {
                     int n = parse_int(v);
                     if (n < 8 || (n & (n - 1)) != 0) throw ValueError("must be a power of two >= 8");
                     return n;
                   }),
      NLSLAB_FIELD("L", "box half-width; the box is [-L, L)^d (length units)", L, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("theta", "nonlinearity power: |u|^{2 theta/d} u", theta, format_double,
                   [](const std::string& v) {
                     double t = parse_double(v);
                     if (!(t > 0.0 && t <= 1.0)) throw ValueError("must lie in (0, 1]");
                     return t;
                   }),
      NLSLAB_FIELD("lambda_re", "Re(lambda)", lambda_re, format_double,
                   [](const std::string& v) { return finite(parse_double(v)); }),
      NLSLAB_FIELD("lambda_im", "Im(lambda); > 0 is the amplifying case", lambda_im,
                   format_double, [](const std::string& v) { return finite(parse_double(v)); }),
      NLSLAB_FIELD("eps", "amplitude for simulate/diagnostics: u(0) = eps phi", eps, format_double,
                   [](const std::string& v) { return nonnegative(parse_double(v)); }),
      NLSLAB_FIELD("eps_ladder", "strictly decreasing eps values for sweep", eps_ladder,
                   format_list,
                   [](const std::string& v) {
                     auto l = parse_list(v);
                     for (std::size_t i = 0; i < l.size(); ++i) {
                       positive(l[i]);
                       if (i && !(l[i] < l[i - 1])) throw ValueError("must be strictly decreasing");
                     }
                     return l;
                   }),
      NLSLAB_FIELD("s", "Sobolev/weight index of Sigma^s", s, format_double,
                   [](const std::string& v) { return nonnegative(parse_double(v)); }),
      NLSLAB_FIELD("dt_init", "largest time step (time units)", dt_init, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("dt_safety", "safety factor c_dt in (0, 1) of the adaptive step law",
                   dt_safety, format_double,
                   [](const std::string& v) {
                     double c = parse_double(v);
                     if (!(c > 0.0 && c < 1.0)) throw ValueError("must lie in (0, 1)");
                     return c;
                   }),
      NLSLAB_FIELD("blowup_norm_threshold", "sup-norm blow-up cap; auto = 1000/eps",
                   blowup_norm_threshold, format_optional, parse_optional_positive),
      NLSLAB_FIELD("boundary_mass_tolerance",
                   "largest mass fraction allowed where max|x_a| > 0.9 L",
                   boundary_mass_tolerance, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("t_max", "censoring time (time units)", t_max, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("enforce_hypotheses", "reject s outside d/2 < s < min{2, 1 + 2 theta/d}",
                   enforce_hypotheses, format_bool, parse_bool),
      NLSLAB_FIELD("diagnostics_every", "steps between recorded diagnostics", diagnostics_every,
                   format_int, [](const std::string& v) { return positive(parse_int(v)); }),
      NLSLAB_FIELD("blowup_time_rtol", "relative bracket width of the blow-up step",
                   blowup_time_rtol, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("spectral_tail_tolerance", "largest allowed energy fraction above 2/3 Nyquist",
                   spectral_tail_tolerance, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("data.kind", "initial data: gaussian | super_gaussian | bump_sum", data.kind,
                   format_string,
                   [](const std::string& v) {
                     return one_of(v, {"gaussian", "super_gaussian", "bump_sum"});
                   }),
      NLSLAB_FIELD("data.amplitude", "peak amplitude (gaussian, super_gaussian)", data.amplitude,
                   format_double, [](const std::string& v) { return finite(parse_double(v)); }),
      NLSLAB_FIELD("data.width", "width (gaussian, super_gaussian)", data.width, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("data.center", "center, one value or one per axis", data.center, format_list,
                   parse_list),
      NLSLAB_FIELD("data.modulation", "wave vector k of e^{i k.x}, one value or one per axis",
                   data.modulation, format_list, parse_list),
      NLSLAB_FIELD("data.order", "super_gaussian order (1 is a gaussian)", data.order,
                   format_double, [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("data.centers", "bump_sum centers along x_1", data.centers, format_list,
                   parse_list),
      NLSLAB_FIELD("data.widths", "bump_sum widths", data.widths, format_list,
                   [](const std::string& v) {
                     auto l = parse_list(v);
                     for (double w : l) positive(w);
                     return l;
                   }),
      NLSLAB_FIELD("data.amplitudes", "bump_sum amplitudes", data.amplitudes, format_list,
                   parse_list),
      NLSLAB_FIELD("ode.a", "time-decay exponent a in (0, 1)", ode.a, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.b", "power b > 0 of |eta|^b eta", ode.b, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.eps", "profile amplitude; auto = largest admissible", ode.eps,
                   format_optional, parse_optional_positive),
      NLSLAB_FIELD("ode.t_star", "initial time t_*", ode.t_star, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.psi0_sup", "sup|psi_0|; psi_0(xi) = psi0_sup exp(-xi^2/2)", ode.psi0_sup,
                   format_double, [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.sigma", "window parameter in (0, tau_1)", ode.sigma, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.C1", "initial perturbation constant", ode.C1, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.C2", "forcing constant", ode.C2, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.delta", "perturbation order delta > 0", ode.delta, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("ode.shape", "forcing shape: zero | oscillatory | worst_sign", ode.shape,
                   format_string,
                   [](const std::string& v) {
                     return one_of(v, {"zero", "oscillatory", "worst_sign"});
                   }),
      NLSLAB_FIELD("ode.omega", "oscillatory forcing frequency", ode.omega, format_double,
                   [](const std::string& v) { return finite(parse_double(v)); }),
      NLSLAB_FIELD("ode.xi_samples", "frequencies integrated independently", ode.xi_samples,
                   format_list, parse_list),
      NLSLAB_FIELD("ode.time_samples", "recorded times per frequency", ode.time_samples,
                   format_int, [](const std::string& v) { return positive(parse_int(v)); }),
      NLSLAB_FIELD("convergence.refinements", "number of dt and n halvings",
                   convergence_refinements, format_int,
                   [](const std::string& v) { return positive(parse_int(v)); }),
      NLSLAB_FIELD("convergence.t_end", "end time of the convergence runs", convergence_t_end,
                   format_double, [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("convergence.dt", "coarsest fixed step", convergence_dt, format_double,
                   [](const std::string& v) { return positive(parse_double(v)); }),
      NLSLAB_FIELD("output_dir", "directory for JSON and CSV output", output_dir, format_string,
                   [](const std::string& v) {
                     auto s = trim(v);
                     if (s.empty()) throw ValueError("must not be empty");
                     return s;
                   }),
      NLSLAB_FIELD("jobs", "parallel runs in a sweep", jobs, format_int,
                   [](const std::string& v) { return positive(parse_int(v)); }),
      NLSLAB_FIELD("tolerance", "relative slack of the sweep verdict", tolerance, format_double,
                   [](const std::string& v) {
                     double t = parse_double(v);
                     if (!(t >= 0.0 && t < 1.0)) throw ValueError("must lie in [0, 1)");
                     return t;
                   }),
  };
  return table;
}

#undef NLSLAB_FIELD

}  // namespace detail

/// Checks that only make sense across fields. Reports the offending key.
inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& msg) {
    throw ConfigError("field '" + key + "': " + msg);
  };
  auto per_axis = [&](const std::string& key, const std::vector<double>& v) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(c.dimension))
      fail(key, "needs 1 or " + std::to_string(c.dimension) + " values");
  };
  per_axis("data.center", c.data.center);
  per_axis("data.modulation", c.data.modulation);
  if (c.data.kind == "bump_sum" &&
      (c.data.widths.size() != c.data.centers.size() ||
       c.data.amplitudes.size() != c.data.centers.size()))
    fail("data.widths", "data.centers, data.widths and data.amplitudes need equal lengths");
  if (!(c.ode.a < 1.0)) fail("ode.a", "must lie in (0, 1)");
}

/// key = value lines; '#' starts a comment. Unknown and repeated keys are errors.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::vector<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const detail::Field* field = nullptr;
    for (const auto& f : detail::fields())
      if (key == f.key) field = &f;
    if (!field) throw ConfigError(where + ": unknown key '" + key + "'");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError(where + ": field '" + key + "' given twice");
    seen.push_back(key);
    if (value.empty()) throw ConfigError(where + ": field '" + key + "': missing value");
    try {
      field->set(cfg, value);
    } catch (const detail::ValueError& e) {
      throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

/// Canonical serialization: every key in schema order, no comments.
inline std::string serialize(const ExperimentConfig& c) {
  std::string out;
  for (const auto& f : detail::fields()) out += std::string(f.key) + " = " + f.get(c) + "\n";
  return out;
}

/// Canonical form annotated with documentation and defaults (print-config).
inline std::string annotated(const ExperimentConfig& c) {
  const ExperimentConfig defaults;
  std::string out = "# nlslab configuration: key = value, '#' starts a comment.\n";
  for (const auto& f : detail::fields()) {
    out += "# " + std::string(f.doc) + " [default: " + f.get(defaults) + "]\n";
    out += std::string(f.key) + " = " + f.get(c) + "\n";
  }
  return out;
}

/// First 16 hex digits of SHA-256 over the canonical serialization.
inline std::string fingerprint(const ExperimentConfig& c) {
  const std::string text = serialize(c);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("fingerprint: SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Fingerprint of the configuration specialised to one eps.
inline std::string run_fingerprint(ExperimentConfig c, double eps) {
  c.eps = eps;
  return fingerprint(c);
}

inline Grid make_grid(const ExperimentConfig& c) {
  return Grid(c.dimension, static_cast<std::size_t>(c.n), c.L);
}

inline SolverConfig solver_config(const ExperimentConfig& c, double eps) {
  SolverConfig s{make_grid(c), NonlinearityParams(c.lambda(), c.theta, c.dimension)};
  s.eps = eps;
  s.s = c.s;
  s.dt_init = c.dt_init;
  s.dt_safety = c.dt_safety;
  s.blowup_norm_threshold = c.blowup_norm_threshold;
  s.boundary_mass_tolerance = c.boundary_mass_tolerance;
  s.t_max = c.t_max;
  s.enforce_hypotheses = c.enforce_hypotheses;
  s.diagnostics_every = c.diagnostics_every;
  s.blowup_time_rtol = c.blowup_time_rtol;
  s.spectral_tail_tolerance = c.spectral_tail_tolerance;
  return s;
}

inline ComplexField initial_data(const InitialData& data, const Grid& g) {
  const int d = g.dimension();
  auto axis = [&](const std::vector<double>& v, int a) { return v.size() == 1 ? v[0] : v[a]; };
  return sample_physical(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < d; ++a) {
      const double y = x[a] - axis(data.center, a);
      r2 += y * y;
      phase += axis(data.modulation, a) * x[a];
    }
    double env = 0.0;
    if (data.kind == "gaussian") {
      env = data.amplitude * std::exp(-r2 / (2.0 * data.width * data.width));
    } else if (data.kind == "super_gaussian") {
      env = data.amplitude * std::exp(-0.5 * std::pow(r2 / (data.width * data.width), data.order));
    } else {
      double transverse = 0.0;
      for (int a = 1; a < d; ++a) transverse += x[a] * x[a];
      for (std::size_t j = 0; j < data.centers.size(); ++j) {
        const double y = x[0] - data.centers[j];
        env += data.amplitudes[j] * std::exp(-y * y / (2.0 * data.widths[j] * data.widths[j]));
      }
      env *= std::exp(-0.5 * transverse);
    }
    return env * std::polar(1.0, phase);
  });
}

inline ComplexField initial_data(const ExperimentConfig& c) {
  return initial_data(c.data, make_grid(c));
}

// ---------------------------------------------------------------------------
// JSON and CSV persistence

using nlohmann::json;

namespace detail {

// JSON has no NaN or infinity; those travel as strings.
inline json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline double read_number(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

inline json to_json(const NormReport& n) {
  using detail::number;
  return {{"l2", number(n.l2)},         {"l_inf", number(n.l_inf)},
          {"h_s0", number(n.h_s0)},     {"h_0s", number(n.h_0s)},
          {"sigma_s", number(n.sigma_s)}, {"infinite", n.infinite}};
}

inline NormReport norm_report_from_json(const json& j) {
  using detail::read_number;
  NormReport n;
  n.l2 = read_number(j.at("l2"));
  n.l_inf = read_number(j.at("l_inf"));
  n.h_s0 = read_number(j.at("h_s0"));
  n.h_0s = read_number(j.at("h_0s"));
  n.sigma_s = read_number(j.at("sigma_s"));
  n.infinite = j.at("infinite").get<bool>();
  return n;
}

inline json to_json(const RunRecord& r) {
  using detail::number;
  json diag = json::array();
  for (const auto& d : r.diagnostics)
    diag.push_back({{"t", number(d.t)},
                    {"norms", to_json(d.norms)},
                    {"energy", number(d.energy)},
                    {"mass", number(d.mass)},
                    {"boundary_fraction", number(d.boundary_fraction)},
                    {"spectral_tail", number(d.spectral_tail)}});
  json rem = json::array();
  for (const auto& s : r.remainder) rem.push_back({{"t", number(s.t)}, {"scaled", number(s.scaled)}});
  return {{"schema_version", kSchemaVersion},
          {"kind", "run_record"},
          {"eps", number(r.eps)},
          {"T_eps", number(r.T_eps)},
          {"censored", r.censored},
          {"contaminated", r.contaminated},
          {"status", r.status},
          {"criterion", r.criterion},
          {"t_pointwise", number(r.t_pointwise)},
          {"t_threshold", number(r.t_threshold)},
          {"invariant_quantity", number(r.invariant_quantity)},
          {"bound_value", number(r.bound_value)},
          {"d0_ratio", number(r.d0_ratio)},
          {"t_star", number(r.t_star)},
          {"gamma", number(r.gamma)},
          {"max_remainder_scaled", number(r.max_remainder_scaled)},
          {"remainder_at_t_star", number(r.remainder_at_t_star)},
          {"remainder_window_samples", r.remainder_window_samples},
          {"t_underresolved", number(r.t_underresolved)},
          {"resolution_ok", r.resolution_ok},
          {"outside_hypotheses", r.outside_hypotheses},
          {"fingerprint", r.fingerprint},
          {"dimension", r.dimension},
          {"theta", number(r.theta)},
          {"n", r.n},
          {"L", number(r.L)},
          {"steps", r.steps},
          {"diagnostics", diag},
          {"remainder", rem}};
}

inline RunRecord run_record_from_json(const json& j) {
  using detail::read_number;
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw ConfigError("run record: unsupported schema_version");
  RunRecord r;
  r.eps = read_number(j.at("eps"));
  r.T_eps = read_number(j.at("T_eps"));
  r.censored = j.at("censored").get<bool>();
  r.contaminated = j.at("contaminated").get<bool>();
  r.status = j.at("status").get<std::string>();
  r.criterion = j.at("criterion").get<std::string>();
  r.t_pointwise = read_number(j.at("t_pointwise"));
  r.t_threshold = read_number(j.at("t_threshold"));
  r.invariant_quantity = read_number(j.at("invariant_quantity"));
  r.bound_value = read_number(j.at("bound_value"));
  r.d0_ratio = read_number(j.at("d0_ratio"));
  r.t_star = read_number(j.at("t_star"));
  r.gamma = read_number(j.at("gamma"));
  r.max_remainder_scaled = read_number(j.at("max_remainder_scaled"));
  r.remainder_at_t_star = read_number(j.at("remainder_at_t_star"));
  r.remainder_window_samples = j.at("remainder_window_samples").get<std::size_t>();
  r.t_underresolved = read_number(j.at("t_underresolved"));
  r.resolution_ok = j.at("resolution_ok").get<bool>();
  r.outside_hypotheses = j.at("outside_hypotheses").get<bool>();
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.dimension = j.at("dimension").get<int>();
  r.theta = read_number(j.at("theta"));
  r.n = j.at("n").get<std::size_t>();
  r.L = read_number(j.at("L"));
  r.steps = j.at("steps").get<std::size_t>();
  for (const auto& d : j.at("diagnostics")) {
    DiagnosticSample s;
    s.t = read_number(d.at("t"));
    s.norms = norm_report_from_json(d.at("norms"));
    s.energy = read_number(d.at("energy"));
    s.mass = read_number(d.at("mass"));
    s.boundary_fraction = read_number(d.at("boundary_fraction"));
    s.spectral_tail = read_number(d.at("spectral_tail"));
    r.diagnostics.push_back(s);
  }
  for (const auto& s : j.at("remainder"))
    r.remainder.push_back({read_number(s.at("t")), read_number(s.at("scaled"))});
  return r;
}

inline json to_json(const SweepSummary& s) {
  using detail::number;
  json runs = json::array();
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    runs.push_back({{"eps", number(r.eps)},
                    {"T_eps", number(r.T_eps)},
                    {"q_eps", number(s.q[i])},
                    {"running_min", number(s.running_min[i])},
                    {"status", r.status},
                    {"criterion", r.criterion},
                    {"censored", r.censored},
                    {"contaminated", r.contaminated},
                    {"resolution_ok", r.resolution_ok},
                    {"d0_ratio", number(r.d0_ratio)},
                    {"max_remainder_scaled", number(r.max_remainder_scaled)},
                    {"fingerprint", r.fingerprint}});
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "sweep_summary"},
          {"bound_value", number(s.bound_value)},
          {"tolerance", number(s.tolerance)},
          {"min_q", number(s.min_q)},
          {"d0_estimate", number(s.d0_estimate)},
          {"valid_runs", s.valid_runs},
          {"verdict", to_string(s.verdict)},
          {"runs", runs}};
}

struct CsvRow {
  double eps = 0.0;
  double T_eps = 0.0;
  double q_eps = 0.0;
  double bound_value = 0.0;
  std::string status;
  std::string fingerprint;
};

inline const char* kCsvHeader = "eps,T_eps,q_eps,bound_value,status,fingerprint";

inline CsvRow csv_row(const RunRecord& r) {
  return {r.eps, r.T_eps, r.invariant_quantity, r.bound_value, r.status, r.fingerprint};
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows)
    os << format_double(r.eps) << ',' << format_double(r.T_eps) << ',' << format_double(r.q_eps)
       << ',' << format_double(r.bound_value) << ',' << r.status << ',' << r.fingerprint << '\n';
}

inline std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ConfigError("summary CSV: unexpected header");
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw ConfigError("summary CSV line " + std::to_string(lineno) + ": expected 6 columns");
    try {
      rows.push_back({detail::parse_double(cells[0]), detail::parse_double(cells[1]),
                      detail::parse_double(cells[2]), detail::parse_double(cells[3]), cells[4],
                      cells[5]});
    } catch (const detail::ValueError& e) {
      throw ConfigError("summary CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

/// Single writer for everything that lands in the output directory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + root_.string());
  }

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto path = root_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return path;
  }

  std::filesystem::path write_json(const std::string& name, const json& j) const {
    return write(name, j.dump(2) + "\n");
  }

  std::filesystem::path write_summary(const std::vector<RunRecord>& records,
                                      const std::string& name = "summary.csv") const {
    std::vector<CsvRow> rows;
    for (const auto& r : records) rows.push_back(csv_row(r));
    std::ostringstream os;
    write_csv(os, rows);
    return write(name, os.str());
  }

  static std::string run_file_name(const RunRecord& r) {
    return "run_eps_" + format_double(r.eps) + ".json";
  }

 private:
  std::filesystem::path root_;
};

inline RunRecord read_run_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return run_record_from_json(json::parse(in));
}

}  // namespace nlslab::io
