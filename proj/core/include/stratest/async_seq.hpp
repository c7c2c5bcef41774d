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

#ifndef STRATEST_ASYNC_SEQ_HPP_
#define STRATEST_ASYNC_SEQ_HPP_

// Sensors transmit one after another. Sensor i treats the messages already
// sent as side information it does not use, and the receiver re-estimates
// after every message. Each step is the single-sensor problem without side
// channel, posed on Psi_i = Cov((x, theta_i) | y_1..y_{i-1}).

#include <cstdint>
#include <optional>
#include <vector>

#include "stratest/gaussian_core.hpp"
#include "stratest/multi_sync.hpp"
#include "stratest/static_single.hpp"

namespace stratest {

struct SequentialStep {
  Index i = 1;  // 1-based transmission index
  SymMatrix psi;  // Cov((x, theta_i) | earlier messages)
  AffineSensorPolicy policy;
  EquilibriumReport report;  // single-sensor solution on psi (kappa = 1)
  // Gain on the innovation y_i - E{y_i | earlier}, for the full state
  // (x, theta_1..theta_N); the first n_x rows update the estimate of x.
  Matrix state_gain;
  double error_after = 0.0;  // tr Cov(x | y_1..y_i)
  double sensor_cost = 0.0;  // E ||(x + theta_i) - E{x | y_1..y_i}||^2
};

struct SequentialResult {
  std::vector<SequentialStep> steps;
  SymMatrix posterior;  // Cov(state | all messages)
  Index n_x = 0;
};

/// Runs the N-step sequential game on the population prior. `kappas`, when
/// given, rescales step i's policy by kappas[i-1] (nonzero). Psi_i is kept
/// by low-rank downdates of the full conditional covariance. The receiver
/// error shrinks geometrically in the step count, so long runs end in
/// SingularConditioning once cond(Psi_i) exceeds 1 / kPdTolerance (about 28
/// steps for unit scalar variances).
/// Throws InvalidDimensions, NotPositiveDefinite, SingularConditioning.
SequentialResult sequential_equilibrium(
    const PopulationConfig& config, Index n_z = 1,
    const std::optional<std::vector<double>>& kappas = std::nullopt);

struct AsyncSyncRow {
  Index n = 1;
  double async_error = 0.0;
  double sync_error = 0.0;
};

/// Receiver error after N sensors under both communication structures,
/// N = 1..n_max. Since sensors are myopic, the first N steps of one long
/// sequential run are the N-sensor sequential game. Throws
/// UnsupportedRegime.
std::vector<AsyncSyncRow> async_vs_sync_compare(const PopulationConfig& config,
                                                Index n_max);

/// Simulated ||x - x_hat_N||^2 running the receiver's recursive estimator.
/// Stream 0 draws the state, stream i the noise of sensor i.
MonteCarloEstimate monte_carlo_sequential_error(const PopulationConfig& config,
                                                const SequentialResult& result,
                                                Index samples,
                                                std::uint64_t seed);

}  // namespace stratest

#endif  // STRATEST_ASYNC_SEQ_HPP_
