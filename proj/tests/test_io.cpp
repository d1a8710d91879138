#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "nlslab/io.hpp"

using namespace nlslab;
using namespace nlslab::io;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nlslab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 1024;
  c.L = 40.0;
  c.eps = 0.4;
  c.eps_ladder = {0.4, 0.3};
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  ExperimentConfig c;
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_EQ(parse_config(annotated(c)), c);
  EXPECT_EQ(serialize(parse_config(serialize(c))), serialize(c));
}

TEST(Config, NonDefaultValuesRoundTrip) {
  ExperimentConfig c;
  c.dimension = 2;
  c.n = 64;
  c.L = 12.5;
  c.theta = 0.9;
  c.lambda_re = -0.3;
  c.lambda_im = 2.0;
  c.eps_ladder = {0.5, 0.25, 0.125};
  c.blowup_norm_threshold = 123.456;
  c.enforce_hypotheses = true;
  c.data.kind = "bump_sum";
  c.data.center = {0.1, -0.2};
  c.data.modulation = {1.0 / 3.0};
  c.data.centers = {-1.0, 0.0, 1.0};
  c.data.widths = {0.5, 0.6, 0.7};
  c.data.amplitudes = {1.0, -1.0, 0.1};
  c.ode.eps = 0.01;
  c.ode.shape = "worst_sign";
  c.output_dir = "results/run a";
  c.jobs = 4;
  c.tolerance = 0.05;
  auto back = parse_config(serialize(c));
  EXPECT_EQ(back, c);
}

TEST(Config, CommentsAndPartialFiles) {
  auto c = parse_config("# comment\n\n  theta = 0.25  # trailing\neps=0.3\n");
  EXPECT_EQ(c.theta, 0.25);
  EXPECT_EQ(c.eps, 0.3);
  EXPECT_EQ(c.n, ExperimentConfig{}.n);
}

TEST(Config, RejectsUnknownKeysWithLine) {
  try {
    parse_config("theta = 0.5\n\nthetta = 0.5\n");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("thetta"), std::string::npos) << msg;
  }
}

TEST(Config, ReportsFieldOnBadValue) {
  struct Case {
    const char* text;
    const char* field;
  };
  for (auto [text, field] : {Case{"n = 100\n", "'n'"}, Case{"theta = 1.5\n", "'theta'"},
                             Case{"eps_ladder = 0.1, 0.2\n", "'eps_ladder'"},
                             Case{"dt_init = abc\n", "'dt_init'"},
                             Case{"enforce_hypotheses = maybe\n", "'enforce_hypotheses'"},
                             Case{"data.kind = square\n", "'data.kind'"},
                             Case{"eps =\n", "'eps'"},
                             Case{"eps = 0.1\neps = 0.2\n", "'eps'"}}) {
    try {
      parse_config(text);
      FAIL() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(parse_config("just words\n"), ConfigError);
  EXPECT_THROW(parse_config("dimension = 2\ndata.center = 1, 2, 3\n"), ConfigError);
}

TEST(Config, FingerprintTracksEveryField) {
  const ExperimentConfig base;
  const std::string fp = fingerprint(base);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fingerprint(parse_config(serialize(base))), fp);

  // Perturb each serialized field in turn and re-parse.
  std::istringstream lines(serialize(base));
  std::string line;
  std::set<std::string> seen{fp};
  int count = 0;
  while (std::getline(lines, line)) {
    auto key = line.substr(0, line.find(" = "));
    std::string alt;
    if (key == "dimension") alt = "2";
    else if (key == "n") alt = "512";
    else if (key == "enforce_hypotheses") alt = "on";
    else if (key == "data.kind") alt = "super_gaussian";
    else if (key == "ode.shape") alt = "zero";
    else if (key == "output_dir") alt = "elsewhere";
    else if (key == "blowup_norm_threshold" || key == "ode.eps") alt = "7";
    else if (key == "eps_ladder") alt = "0.5, 0.1";
    else if (key == "diagnostics_every" || key == "jobs" || key == "ode.time_samples" ||
             key == "convergence.refinements")
      alt = "3";
    else if (key == "ode.a" || key == "dt_safety" || key == "tolerance") alt = "0.3";
    else if (key == "theta") alt = "0.75";
    else if (key.rfind("data.center", 0) == 0 || key == "data.modulation") alt = "0.5";
    else alt = "0.625";
    std::string text = key + " = " + alt + "\n";
    if (key == "dimension") text += "n = 64\n";
    auto c = parse_config(text);
    ASSERT_FALSE(c == base) << key;
    EXPECT_TRUE(seen.insert(fingerprint(c)).second) << key;
    ++count;
  }
  EXPECT_EQ(count, static_cast<int>(io::detail::fields().size()));
  EXPECT_NE(run_fingerprint(base, 0.3), run_fingerprint(base, 0.4));
}

TEST(InitialData, BuiltinShapes) {
  ExperimentConfig c;
  c.n = 256;
  c.L = 16.0;
  auto g = initial_data(c);
  EXPECT_NEAR(sup_modulus(g), 1.0, 1e-15);
  EXPECT_NEAR(l2_norm(g), std::sqrt(std::sqrt(std::acos(-1.0))), 1e-12);

  c.data.modulation = {2.0};
  auto m = initial_data(c);
  EXPECT_NEAR(l2_norm(m), l2_norm(g), 1e-13);

  c.data.kind = "super_gaussian";
  c.data.order = 1.0;
  c.data.modulation = {0.0};
  auto sg = initial_data(c);
  for (std::size_t i = 0; i < sg.size(); ++i) EXPECT_NEAR(std::abs(sg[i] - g[i]), 0.0, 1e-15);

  c.data.kind = "bump_sum";
  c.data.centers = {-3.0, 3.0};
  c.data.widths = {1.0, 1.0};
  c.data.amplitudes = {1.0, 2.0};
  auto b = initial_data(c);
  EXPECT_NEAR(sup_modulus(b), 2.0, 1e-3);

  c.dimension = 2;
  c.n = 64;
  c.data.kind = "gaussian";
  c.data.center = {1.0, -1.0};
  auto g2 = initial_data(c);
  EXPECT_NEAR(sup_modulus(g2), 1.0, 1e-12);
}

TEST(Persistence, RunRecordJsonRoundTrip) {
  auto c = small_config();
  auto rec = simulate(solver_config(c, c.eps), initial_data(c), run_fingerprint(c, c.eps));
  ASSERT_FALSE(rec.diagnostics.empty());
  OutputDir out(scratch_dir("json"));
  auto path = out.write_json(OutputDir::run_file_name(rec), to_json(rec));
  auto back = read_run_json(path);
  EXPECT_EQ(to_json(back).dump(), to_json(rec).dump());
  EXPECT_EQ(back.T_eps, rec.T_eps);
  EXPECT_EQ(back.fingerprint, rec.fingerprint);
  EXPECT_TRUE(std::isnan(back.t_pointwise) == std::isnan(rec.t_pointwise));
  ASSERT_EQ(back.diagnostics.size(), rec.diagnostics.size());
  EXPECT_EQ(back.diagnostics.back().norms.sigma_s, rec.diagnostics.back().norms.sigma_s);
  EXPECT_EQ(to_json(rec).at("schema_version"), kSchemaVersion);
}

TEST(Persistence, SweepCsvHasOneRowPerEpsAndIsDeterministic) {
  auto c = small_config();
  auto run = [&](const std::string& name) {
    auto summary = sweep(c.eps_ladder, solver_config(c, c.eps_ladder[0]), initial_data(c),
                         c.tolerance, c.jobs, [&](double e) { return run_fingerprint(c, e); });
    OutputDir out(scratch_dir(name));
    return out.write_summary(summary.records);
  };
  auto first = run("csv_a");
  auto second = run("csv_b");
  EXPECT_EQ(read_file(first), read_file(second));
  std::ifstream in(first);
  auto rows = read_csv(in);
  ASSERT_EQ(rows.size(), c.eps_ladder.size());
  EXPECT_EQ(rows[0].eps, 0.4);
  EXPECT_EQ(rows[1].fingerprint, run_fingerprint(c, 0.3));
  EXPECT_EQ(rows[0].status, "blown_up");
  EXPECT_NEAR(rows[0].bound_value, 0.5, 1e-12);
}

TEST(Persistence, CsvRejectsMalformedInput) {
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_csv(bad_header), ConfigError);
  std::istringstream short_row(std::string(kCsvHeader) + "\n0.1,2\n");
  EXPECT_THROW(read_csv(short_row), ConfigError);
}
