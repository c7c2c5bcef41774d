// Copyright 2026 The stratest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "config.hpp"
#include "experiments.hpp"
#include "table.hpp"

namespace stratest::cli {
namespace {

const std::filesystem::path kConfigs = STRATEST_CONFIG_DIR;

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::Parse(in, "inline");
}

std::string csv(const Table& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

double cell(const Table& t, std::size_t row, std::size_t col) {
  return std::get<double>(t.rows[row][col]);
}

TEST(ConfigParse, ValuesCommentsAndBareWords) {
  const Config c = parse(
      "# header\n"
      "experiment = herding   # trailing comment\n"
      "v_xx = [[1, 0.5], [0.5, 2]]\n"
      "sigma = 0.382\n"
      "n_max = 12\n"
      "compare = true\n"
      "label = \"a # b\"\n");
  EXPECT_EQ(c.experiment(), "herding");
  EXPECT_EQ(c.integer("n_max"), 12);
  EXPECT_DOUBLE_EQ(c.number("sigma"), 0.382);
  EXPECT_TRUE(c.boolean("compare"));
  EXPECT_EQ(c.string("label"), "a # b");
  const Matrix m = c.matrix("v_xx");
  ASSERT_EQ(m.rows(), 2);
  EXPECT_DOUBLE_EQ(m(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m(1, 1), 2.0);
  EXPECT_EQ(c.matrix("sigma").size(), 1);
  EXPECT_EQ(c.integer("missing", 4), 4);
  EXPECT_EQ(c.seed(), kDefaultSeed);
}

TEST(ConfigParse, Rejections) {
  EXPECT_THROW(parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse("a = [1, \n"), ConfigError);
  EXPECT_THROW(parse("m = [[1, 2], [3]]\n").matrix("m"), ConfigError);
  EXPECT_THROW(parse("m = [[1, 2], [3, 4]]\n").covariance("m"), ConfigError);
  EXPECT_THROW(parse("n = 1.5\n").integer("n"), ConfigError);
  EXPECT_THROW(parse("seed = -3\n").seed(), ConfigError);
  EXPECT_THROW(parse("x = 1\n").number("y"), ConfigError);
  const Config unknown = parse("experiment = fig3\nbogus = 1\n");
  EXPECT_THROW(run(unknown), ConfigError);
  EXPECT_THROW(run(parse("experiment = nope\n")), ConfigError);
  EXPECT_THROW(run(parse("experiment = multisync\nv_xx = 1\nv_thetatheta = 1\nsamples = 10\n")),
               ConfigError);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.27639320225002095}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Csv, HeaderQuotingAndLineEndings) {
  Table t;
  t.header = {"name", "value"};
  t.add({std::string("a,b"), 1.5});
  t.add({std::string("say \"hi\""), std::int64_t{3}});
  EXPECT_EQ(csv(t), "name,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",3\n");
  EXPECT_THROW(t.add({1.0}), std::invalid_argument);
}

TEST(Fig2, KnownRowsAndBothColumns) {
  const Table t = run_fig2(-2.0, 2.0, 101);
  ASSERT_EQ(t.rows.size(), 101u);
  const std::size_t zero = 50;
  EXPECT_NEAR(cell(t, zero, 0), 0.0, 1e-15);
  EXPECT_NEAR(cell(t, zero, 1), 0.8507, 1e-4);
  EXPECT_NEAR(cell(t, zero, 2), 0.5257, 1e-4);
  EXPECT_NEAR(cell(t, zero, 3), (std::sqrt(5.0) + 1.0) / 2.0, 1e-12);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EXPECT_NEAR(cell(t, r, 1), cell(t, r, 4), 1e-9);
    EXPECT_NEAR(cell(t, r, 2), cell(t, r, 5), 1e-9);
  }
  const Table half = run_fig2(-0.5, 0.5, 3);
  EXPECT_NEAR(cell(half, 0, 3), 1.5, 1e-12);
}

TEST(Fig3, EqualStartOrderingAndLimit) {
  const Table t = run_fig3(100, 0.3820);
  ASSERT_EQ(t.header, (std::vector<std::string>{"N", "e1", "e2", "e3", "ratio_e2_e3"}));
  for (std::size_t j = 1; j <= 3; ++j) EXPECT_NEAR(cell(t, 0, j), 0.2764, 1e-3);
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    EXPECT_GT(cell(t, r, 1), cell(t, r - 1, 1));
    EXPECT_LT(cell(t, r, 2), cell(t, r - 1, 2));
    EXPECT_LT(cell(t, r, 3), cell(t, r - 1, 3));
  }
  const Table big = run_fig3(10000, 0.3820);
  EXPECT_NEAR(cell(big, 9999, 4), 1.0 / 0.3820, 0.02 / 0.3820);
}

TEST(Experiments, ShippedConfigsRunAndAreByteIdentical) {
  for (const char* name : {"fig2", "fig3", "static", "dynamic", "multisync",
                           "herding", "async"}) {
    Config c = Config::Load(kConfigs / (std::string(name) + ".conf"));
    c.set("samples", 2000);
    const std::string first = csv(run(c).table);
    const std::string second = csv(run(c).table);
    EXPECT_EQ(first, second) << name;
    EXPECT_GT(first.size(), 20u) << name;
  }
}

TEST(Experiments, SeedChangesMonteCarloColumnsOnly) {
  Config c = Config::Load(kConfigs / "multisync.conf");
  c.set("samples", 2000);
  const Table a = run(c).table;
  c.set("seed", 99);
  const Table b = run(c).table;
  EXPECT_EQ(cell(a, 3, 1), cell(b, 3, 1));
  EXPECT_NE(cell(a, 3, 7), cell(b, 3, 7));
}

TEST(Experiments, AsyncCompareTable) {
  Config c = parse("experiment = async\nv_xx = 1\nv_thetatheta = 1\nn = 5\ncompare = true\n");
  const Table t = run(c).table;
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_NEAR(cell(t, 0, 1), cell(t, 0, 2), 1e-12);
}

std::string status_of(const Table& t, const std::string& suite) {
  for (const auto& row : t.rows) {
    if (std::get<std::string>(row[0]) == suite) return std::get<std::string>(row[1]);
  }
  return "absent";
}

TEST(Certify, DefaultConfigPasses) {
  const RunResult r = run(Config::Load(kConfigs / "certify.conf"));
  EXPECT_TRUE(r.passed) << csv(r.table);
  for (const auto& row : r.table.rows) {
    EXPECT_EQ(std::get<std::string>(row[1]), "PASS") << std::get<std::string>(row[0]);
  }
}

TEST(Certify, TamperedEquilibriumFailsWithWitness) {
  const RunResult r = run(Config::Load(kConfigs / "certify_tampered.conf"));
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(status_of(r.table, "static.sensor"), "FAIL");
  for (const auto& row : r.table.rows) {
    if (std::get<std::string>(row[0]) == "static.sensor") {
      EXPECT_GT(std::get<double>(row[2]), 1e-3);
      EXPECT_NE(std::get<std::string>(row[4]).find("witness=["), std::string::npos);
    }
  }
}

TEST(Certify, CorrelatedTypesSkipClosedFormSuites) {
  const RunResult r = run(Config::Load(kConfigs / "certify_correlated.conf"));
  EXPECT_TRUE(r.passed) << csv(r.table);
  EXPECT_EQ(status_of(r.table, "multisync.fixed_point"), "SKIPPED");
  EXPECT_EQ(status_of(r.table, "herding.monte_carlo"), "SKIPPED");
  EXPECT_EQ(status_of(r.table, "herding.decomposition"), "PASS");
  EXPECT_EQ(status_of(r.table, "async.psi_direct"), "PASS");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STRATEST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Binary, ExitCodes) {
  const std::string dir = kConfigs.string() + "/";
  EXPECT_EQ(run_cli("run " + dir + "fig3.conf"), 0);
  EXPECT_EQ(run_cli("certify " + dir + "certify_tampered.conf"), 3);
  EXPECT_EQ(run_cli("run " + dir + "does_not_exist.conf"), 2);
  EXPECT_EQ(run_cli("certify " + dir + "fig3.conf"), 2);
  EXPECT_EQ(run_cli("run " + dir + "multisync.conf --samples 10"), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
}

TEST(Binary, OutFileMatchesStdout) {
  const auto tmp = std::filesystem::temp_directory_path() / "stratest_fig3_test.csv";
  const std::string cfg = (kConfigs / "fig3.conf").string();
  ASSERT_EQ(run_cli("run " + cfg + " --out " + tmp.string()), 0);
  std::ifstream in(tmp, std::ios::binary);
  std::stringstream file;
  file << in.rdbuf();
  EXPECT_EQ(file.str(), csv(run(Config::Load(cfg)).table));
  std::filesystem::remove(tmp);
}

}  // namespace
}  // namespace stratest::cli
