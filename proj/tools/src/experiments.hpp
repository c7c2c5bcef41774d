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

#ifndef STRATEST_TOOLS_EXPERIMENTS_HPP_
#define STRATEST_TOOLS_EXPERIMENTS_HPP_

#include "config.hpp"
#include "stratest/dynamic_single.hpp"
#include "stratest/gaussian_core.hpp"
#include "stratest/multi_sync.hpp"
#include "table.hpp"

namespace stratest::cli {

/// Monte Carlo experiments refuse fewer draws than this.
inline constexpr Index kMinSamples = 1000;
inline constexpr Index kDefaultSamples = 100000;

struct RunResult {
  Table table;
  bool passed = true;  // false only when a certificate suite fails
};

/// Dispatches on the `experiment` key. Throws ConfigError and the
/// library's errors.
RunResult run(const Config& config);

/// mu, alpha1, alpha2, ratio from the eigen solver next to the closed form.
Table run_fig2(double mu_min, double mu_max, Index steps);
/// N, e1, e2, e3, ratio_e2_e3 for unit variances.
Table run_fig3(Index n_max, double sigma);
Table run_static(const Config& config);
Table run_dynamic(const Config& config);
Table run_multisync(const Config& config);
Table run_herding(const Config& config);
Table run_async(const Config& config);
/// suite, status, worst_residual, threshold, detail.
RunResult run_certify(const Config& config);

// Model builders shared by the experiments.
JointGaussian static_prior(const Config& config);
PopulationConfig population(const Config& config, Index n);
DynamicModel dynamic_model(const Config& config);
Index samples(const Config& config);

}  // namespace stratest::cli

#endif  // STRATEST_TOOLS_EXPERIMENTS_HPP_
