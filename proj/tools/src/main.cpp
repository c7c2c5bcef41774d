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

// stratest: run equilibrium experiments and certificate suites from a
// config file and write CSV.
//
//   stratest run tools/configs/fig3.conf --out fig3.csv
//   stratest certify tools/configs/certify.conf --seed 7
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config,
// 3 certificate failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "stratest/errors.hpp"
#include "table.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCertificate = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<stratest::Index> samples;
  std::string out;
};

// Errors that mean the config describes an invalid or unsupported model.
bool is_config_error(const std::exception& e) {
  return dynamic_cast<const stratest::cli::ConfigError*>(&e) ||
         dynamic_cast<const stratest::InvalidMatrix*>(&e) ||
         dynamic_cast<const stratest::InvalidDimensions*>(&e) ||
         dynamic_cast<const stratest::InvalidCovariance*>(&e) ||
         dynamic_cast<const stratest::NotPositiveDefinite*>(&e) ||
         dynamic_cast<const stratest::UnsupportedRegime*>(&e);
}

int execute(const Options& opt, bool certify) {
  using namespace stratest::cli;
  Config config = Config::Load(opt.config_path);
  if (opt.seed) config.set("seed", *opt.seed);
  if (opt.samples) config.set("samples", *opt.samples);
  if (certify) {
    if (config.has("experiment") && config.experiment() != "certify") {
      throw ConfigError("certify: config is for experiment '" +
                        config.experiment() + "'");
    }
    config.set("experiment", "certify");
  }
  std::string out_path = opt.out;
  if (out_path.empty() && config.has("out")) out_path = config.string("out");

  const RunResult result = run(config);
  if (out_path.empty() || out_path == "-") {
    write_csv(result.table, std::cout);
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    write_csv(result.table, file);
  }
  return result.passed ? 0 : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg equilibria for estimation with strategic sensors"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("config", opt.config_path, "Experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_option("--samples", opt.samples, "Override the Monte Carlo sample count");
    sub->add_option("--out", opt.out, "CSV output path (default stdout)");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment in a config");
  CLI::App* cert_cmd = app.add_subcommand("certify", "Run every certificate suite");
  add_common(run_cmd);
  add_common(cert_cmd);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return execute(opt, cert_cmd->parsed());
  } catch (const std::exception& e) {
    if (is_config_error(e)) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return kExitConfig;
    }
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
