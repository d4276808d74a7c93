// Copyright 2026 The kerramp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "kerramp/experiments.hpp"

using namespace kerramp;
namespace fs = std::filesystem;

namespace {

std::string csv_of(const ResultTable& t, bool normalized = true) {
  std::ostringstream os;
  write_csv(os, t, normalized, false);
  return os.str();
}

SweepConfig small_fig2a() {
  SweepConfig c = SweepConfig::defaults(Experiment::fig2a);
  c.r = {0.0, db_to_r(4.0), db_to_r(8.0)};
  c.phi_max = {pi, pi / 100};
  c.phi_count = 3;
  c.cutoffs = {3, 1, 8, tol::convergence, 1e-12};
  return c;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("kerramp_test_" + std::to_string(::getpid()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& contents = "") const {
    const fs::path p = path_ / name;
    if (!contents.empty()) std::ofstream(p) << contents;
    return p;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int cli(const std::string& args) {
  const std::string cmd = std::string(KERRAMP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const SweepConfig d = SweepConfig::from_json(json::object(), Experiment::fig2b);
  EXPECT_EQ(d.experiment, Experiment::fig2b);
  EXPECT_EQ(d.n_list, (std::vector<int>{1, 5, 10}));
  EXPECT_NO_THROW(d.validate());
  const json j = json::parse(R"({"r_grid": {"start": 0, "stop": 8, "count": 3}, "n_list": [2],
                                 "cutoffs": {"start": 5, "max": 20}, "frame": "corrected",
                                 "output": {"format": "json"}})");
  const SweepConfig c = SweepConfig::from_json(j, Experiment::fig2b);
  ASSERT_EQ(c.r.size(), 3u);
  EXPECT_NEAR(c.r[1], db_to_r(4.0), 1e-15);
  EXPECT_EQ(c.cutoffs.start, 5);
  EXPECT_EQ(c.cutoffs.max_cutoff, 20);
  EXPECT_EQ(c.frame, Frame::corrected);
  EXPECT_EQ(c.format, Format::json);
  const SweepConfig natural =
      SweepConfig::from_json(json::parse(R"({"r_grid": [0.5], "r_unit": "natural"})"), Experiment::fig2a);
  EXPECT_EQ(natural.r, std::vector<double>{0.5});
}

TEST(Config, RejectsInvalidInput) {
  auto parse = [](const char* text, Experiment e) {
    SweepConfig c = SweepConfig::from_json(json::parse(text), e);
    c.validate();
    return c;
  };
  EXPECT_THROW(parse(R"({"r_grd": [1]})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"experiment": "fig2b"})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"r_grid": []})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"n_list": []})", Experiment::fig2b), std::invalid_argument);
  EXPECT_THROW(parse(R"({"chi_t": 0})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"eta_db": -1})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"r_grid": [-1]})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"r_grid": ["x"]})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"chi": "one"})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"frame": "rotating"})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"cutoffs": {"start": 8, "max": 9}})", Experiment::fig2a), std::invalid_argument);
  EXPECT_THROW(parse(R"({"phi_grid": [0.001]})", Experiment::figS2), std::invalid_argument);
  EXPECT_THROW(parse(R"({"pairs": [{"chi_t": 0.1, "lambda": 0.5}]})", Experiment::figS1), std::invalid_argument);
  EXPECT_THROW(parse(R"({"chi_t_list": [0.1], "phi_grid": [1]})", Experiment::custom), std::invalid_argument);
  EXPECT_THROW(parse(R"({"variant": "n_mode", "modes": 3, "noise": "limit_channel"})", Experiment::custom),
               std::invalid_argument);
  EXPECT_THROW(parse(R"({"variant": "two_mode", "modes": 3})", Experiment::custom), std::invalid_argument);
  EXPECT_THROW(parse(R"({"eta_db_list": [0.1]})", Experiment::custom), std::invalid_argument);
  EXPECT_NO_THROW(parse(R"({"chi_t_list": [0.1]})", Experiment::custom));
}

TEST(Config, HashIsStableAndSensitive) {
  const SweepConfig a = small_fig2a();
  SweepConfig b = small_fig2a();
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.eta_db *= 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  // the canonical form parses back to the same configuration
  const SweepConfig c = SweepConfig::from_json(a.to_json());
  EXPECT_EQ(config_hash(c), config_hash(a));
}

TEST(Normalize, PerSeriesPeakIsExactlyOne) {
  std::vector<ResultRow> rows(5);
  const double raw[] = {0.3, 0.7, 0.1, 2.0, 0.5};
  for (int k = 0; k < 5; ++k) {
    rows[k].series = k < 3 ? "a" : "b";
    rows[k].raw_error = raw[k];
    rows[k].extras["bound"] = 10.0 * raw[k];
  }
  normalize_rows(rows, {"bound"});
  EXPECT_EQ(*rows[1].normalized_error, 1.0);
  EXPECT_EQ(*rows[3].normalized_error, 1.0);
  EXPECT_DOUBLE_EQ(*rows[0].normalized_error, 0.3 / 0.7);
  EXPECT_DOUBLE_EQ(*rows[4].normalized_error, 0.25);
  EXPECT_EQ(rows[3].extras.at("normalized_bound").get<double>(), 1.0);
  for (const auto& r : rows) EXPECT_EQ(r.raw_error, raw[&r - rows.data()]);
}

TEST(Fig2a, ShapeNormalizationAndThreadIndependence) {
  const SweepConfig cfg = small_fig2a();
  const ResultTable t = run_fig2a(cfg);
  ASSERT_EQ(t.rows.size(), 2u * 3u * 3u);
  std::map<std::string, double> peak;
  for (const auto& r : t.rows) {
    peak[r.series] = std::max(peak[r.series], *r.normalized_error);
    EXPECT_TRUE(r.converged);
    const double phi = r.params.at("phi").get<double>();
    const double rr = r.params.at("r").get<double>();
    EXPECT_DOUBLE_EQ(r.params.at("t").get<double>(), phi / std::pow(std::cosh(2 * rr), 2));
  }
  ASSERT_EQ(peak.size(), 2u);
  for (const auto& [s, p] : peak) EXPECT_EQ(p, 1.0) << s;
  EXPECT_DOUBLE_EQ(t.rows.back().params.at("phi").get<double>(), pi / 100);
  RunOptions three;
  three.threads = 3;
  EXPECT_EQ(csv_of(t), csv_of(run_fig2a(cfg, three)));
  EXPECT_EQ(t.metadata.at("config_hash"), config_hash(cfg));
}

TEST(Fig2a, UnlossyZeroSqueezingMatchesBareGate) {
  SweepConfig cfg = small_fig2a();
  cfg.eta_db = 0.0;
  cfg.r = {0.0};
  cfg.phi_max = {pi};
  cfg.phi_count = 1;
  const ResultTable t = run_fig2a(cfg);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_LT(t.rows[0].raw_error, 1e-10);
}

TEST(Fig2b, LimitCurveAndCsvInfinity) {
  SweepConfig cfg = SweepConfig::defaults(Experiment::fig2b);
  cfg.r = {0.0, db_to_r(4.0)};
  cfg.phi_grid = {pi / 100};
  cfg.n_list = {1};
  cfg.frame = Frame::corrected;
  cfg.cutoffs = {3, 1, 6, tol::convergence, 1e-12};
  const ResultTable t = run_fig2b(cfg);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[2].params.at("curve"), "limit");
  EXPECT_TRUE(t.rows[2].params.at("steps").is_null());
  const std::string csv = csv_of(t);
  EXPECT_NE(csv.find(",limit,inf,"), std::string::npos);
  // one row per line and one cell per header column
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto cols = std::count(line.begin(), line.end(), ',');
  while (std::getline(in, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), cols) << line;
  // without squeezing a single dilated step composes to the limit channel
  EXPECT_NEAR(t.rows[0].raw_error, t.rows[2].raw_error, 1e-3 * t.rows[2].raw_error);
}

TEST(FigS1, BoundColumnAndCorrectedDominance) {
  SweepConfig cfg = SweepConfig::defaults(Experiment::figS1);
  cfg.s1_pairs = {{pi / 2, 2.0}};
  cfg.n_list = {1, 4, 16};
  cfg.frame = Frame::corrected;
  cfg.cutoffs = {30, 10, 80, tol::convergence, 1e-12};
  const ResultTable t = run_figS1(cfg);
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.converged);
    const int n = r.params.at("steps").get<int>();
    EXPECT_DOUBLE_EQ(r.extras.at("bound").get<double>(), trotter_bound(1.0, pi / 2, std::acosh(2.0) / 2, n));
    EXPECT_LE(r.raw_error, r.extras.at("bound").get<double>());
  }
  EXPECT_EQ(t.rows[0].extras.at("normalized_bound").get<double>(), 1.0);
}

TEST(FigS2, RowsPerPhaseAndStepCount) {
  SweepConfig cfg = SweepConfig::defaults(Experiment::figS2);
  cfg.phi_grid = {pi / 100};
  cfg.n_list = {1, 2};
  cfg.cutoffs = {3, 1, 4, tol::convergence, 1e-12};
  const ResultTable t = run_figS2(cfg);
  ASSERT_EQ(t.rows.size(), 2u);
  const double r = std::acosh(std::sqrt((pi / 100) / cfg.chi_t)) / 2;
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row.params.at("r").get<double>(), r, 1e-14);
    EXPECT_TRUE(std::isfinite(row.raw_error));
    EXPECT_GT(row.raw_error, 0.0);
  }
  EXPECT_EQ(t.rows[1].params.at("steps").get<int>(), 2);
}

TEST(Custom, ThreeModeAmplification) {
  SweepConfig cfg = SweepConfig::defaults(Experiment::custom);
  cfg.variant = Variant::n_mode;
  cfg.modes = 3;
  cfg.r = {0.3};
  cfg.phi_grid = {};
  cfg.chi_t_list = {0.05};
  cfg.n_list = {2};
  cfg.cutoffs = {4, 2, 16, tol::convergence, 1e-12};
  const ResultTable t = run_custom(cfg);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(t.rows[0].params.at("amplification").get<double>(), std::pow(std::cosh(0.6), 3), 1e-12);
  EXPECT_NEAR(t.rows[0].params.at("phi").get<double>(), 0.05 * std::pow(std::cosh(0.6), 3), 1e-12);
  EXPECT_TRUE(std::isfinite(t.rows[0].raw_error));
}

TEST(Custom, UnsqueezedVariantsAreExact) {
  for (Variant v : {Variant::single_mode, Variant::two_mode}) {
    SweepConfig cfg = SweepConfig::defaults(Experiment::custom);
    cfg.variant = v;
    cfg.r = {0.0};
    cfg.n_list = {3};
    cfg.cutoffs = {3, 1, 6, tol::convergence, 1e-12};
    const ResultTable t = run_custom(cfg);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_LT(t.rows[0].raw_error, 1e-12) << to_string(v);
  }
}

TEST(Custom, RefusesOversizedRunWithDimensionReport) {
  SweepConfig cfg = SweepConfig::defaults(Experiment::custom);
  cfg.variant = Variant::n_mode;
  cfg.modes = 6;
  cfg.cutoffs.max_cutoff = 60;
  try {
    run_custom(cfg);
    FAIL() << "expected a refusal";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("refusing"), std::string::npos) << msg;
    EXPECT_NE(msg.find("Hilbert dimension"), std::string::npos) << msg;
    EXPECT_NE(msg.find("MiB"), std::string::npos) << msg;
  }
}

TEST(Output, JsonMirrorsCsv) {
  const SweepConfig cfg = small_fig2a();
  const ResultTable t = run_fig2a(cfg);
  const json j = table_to_json(t, true, false);
  ASSERT_EQ(j.at("rows").size(), t.rows.size());
  EXPECT_EQ(j.at("metadata").at("experiment"), "fig2a");
  EXPECT_TRUE(j.at("metadata").contains("tolerances"));
  EXPECT_TRUE(j.at("metadata").contains("cutoffs"));
  EXPECT_EQ(j.at("rows")[0].at("raw_error").get<double>(), t.rows[0].raw_error);
  EXPECT_FALSE(j.at("rows")[0].contains("wall_time"));
  std::ostringstream timed;
  write_csv(timed, t, true, true);
  EXPECT_NE(timed.str().find(",wall_time\n"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string good = dir.file("good.json", R"({"experiment": "fig2a", "r_grid": [0, 4],
                                                      "phi_max": [3.14159], "phi_count": 2,
                                                      "cutoffs": {"start": 3, "step": 1, "max": 6}})")
                               .string();
  const std::string bad = dir.file("bad.json", R"({"r_grid": [0, 4], "colour": "blue"})").string();
  const std::string broken = dir.file("broken.json", "{ not json").string();
  const std::string capped = dir.file("capped.json", R"({"pairs": [{"chi_t": 0.4487989505128276, "lambda": 7}],
                                                          "n_list": [2],
                                                          "cutoffs": {"start": 4, "step": 1, "max": 6}})")
                                 .string();
  EXPECT_EQ(cli("fig2a --config " + good), 0);
  EXPECT_EQ(cli("fig2a --config " + bad), 1);
  EXPECT_EQ(cli("fig2a --config " + broken), 1);
  EXPECT_EQ(cli("fig2b --config " + good), 1);
  EXPECT_EQ(cli("fig2a --threads 0"), 1);
  EXPECT_EQ(cli("fig2a --format xml"), 1);
  EXPECT_EQ(cli("nosuch"), 1);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("figs1 --config " + capped), 0);
  EXPECT_EQ(cli("figs1 --config " + capped + " --strict"), 2);
  EXPECT_EQ(cli("--help"), 0);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  TempDir dir;
  const std::string cfg = dir.file("cfg.json", R"({"r_grid": [0, 4, 8], "phi_max": [3.14159, 0.0314159],
                                                     "phi_count": 2, "cutoffs": {"start": 3, "step": 1, "max": 8}})")
                              .string();
  for (const char* format : {"csv", "json"}) {
    const fs::path a = dir.file(std::string("a.") + format);
    const fs::path b = dir.file(std::string("b.") + format);
    ASSERT_EQ(cli("fig2a --config " + cfg + " --format " + format + " --out " + a.string()), 0);
    ASSERT_EQ(cli("fig2a --config " + cfg + " --format " + format + " --threads 2 --out " + b.string()), 0);
    const std::string x = slurp(a);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b)) << format;
  }
  const fs::path raw = dir.file("raw.csv");
  ASSERT_EQ(cli("fig2a --config " + cfg + " --no-normalize --out " + raw.string()), 0);
  EXPECT_EQ(slurp(raw).find("normalized_error"), std::string::npos);
}
