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

// Solver and Monte Carlo throughput. Sizes follow the shapes used by the
// experiments: state dimension for the eigen path, N for populations.

#include <random>

#include <benchmark/benchmark.h>

#include "stratest/async_seq.hpp"
#include "stratest/dynamic_single.hpp"
#include "stratest/herding.hpp"
#include "stratest/multi_sync.hpp"
#include "stratest/static_single.hpp"

namespace {

using stratest::Index;
using stratest::Matrix;
using stratest::SymMatrix;

Matrix random_spd(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = normal(gen);
  }
  return a * a.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
}

stratest::JointGaussian side_prior(Index d) {
  const Matrix s = random_spd(3 * d, 7);
  return stratest::JointGaussian(d, d, SymMatrix::Symmetrized(s));
}

void BM_StaticEquilibrium(benchmark::State& state) {
  const Index d = state.range(0);
  const auto prior = side_prior(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::equilibrium(prior, 1));
  }
}
BENCHMARK(BM_StaticEquilibrium)->RangeMultiplier(2)->Range(1, 32);

void BM_BestResponseCertificate(benchmark::State& state) {
  const auto prior = side_prior(2);
  const auto report = stratest::equilibrium(prior, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::best_response_certificate(
        prior, report, state.range(0), stratest::kDefaultSeed));
  }
}
BENCHMARK(BM_BestResponseCertificate)->Arg(200);

void BM_MonteCarloReceiverError(benchmark::State& state) {
  const auto prior = side_prior(1);
  const auto report = stratest::equilibrium(prior, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::monte_carlo_receiver_error(
        prior, report.policy, report.receiver_gain.gain, state.range(0),
        stratest::kDefaultSeed));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloReceiverError)->Arg(10000)->Arg(100000);

void BM_PlanDynamic(benchmark::State& state) {
  auto s = [](double v) { return Matrix::Constant(1, 1, v); };
  auto q = [](double v) { return SymMatrix(Matrix::Constant(1, 1, v)); };
  const auto model = stratest::DynamicModel::TimeInvariant(
      state.range(0), s(0.9), s(0.8), s(1.0), s(0.0), q(0.2), q(0.1), q(1.0),
      SymMatrix::Identity(2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::plan_equilibria(model, 1));
  }
}
BENCHMARK(BM_PlanDynamic)->Arg(20)->Arg(200);

stratest::PopulationConfig unit(Index n) {
  return stratest::PopulationConfig::Independent(n, SymMatrix::Identity(1),
                                                 SymMatrix::Identity(1));
}

void BM_SymmetricEquilibrium(benchmark::State& state) {
  const auto c = unit(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::symmetric_equilibrium(c));
  }
}
BENCHMARK(BM_SymmetricEquilibrium)->RangeMultiplier(10)->Range(1, 10000);

void BM_Herding(benchmark::State& state) {
  const auto c = unit(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::herding_equilibrium(c));
  }
}
BENCHMARK(BM_Herding)->RangeMultiplier(10)->Range(1, 10000);

void BM_FixedPointCertificate(benchmark::State& state) {
  const auto c = unit(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        stratest::fixed_point_certificate(c, 200, stratest::kDefaultSeed));
  }
}
BENCHMARK(BM_FixedPointCertificate)->Arg(2)->Arg(10);

void BM_Sequential(benchmark::State& state) {
  const auto c = stratest::PopulationConfig::Independent(
      state.range(0), SymMatrix::Symmetrized(random_spd(2, 3)),
      SymMatrix::Symmetrized(random_spd(2, 5)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratest::sequential_equilibrium(c));
  }
}
BENCHMARK(BM_Sequential)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
