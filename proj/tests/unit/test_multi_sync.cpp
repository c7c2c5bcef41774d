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

#include "stratest/multi_sync.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stratest/errors.hpp"
#include "stratest/static_single.hpp"

namespace stratest {
namespace {

PopulationConfig unit_config(Index n) {
  return PopulationConfig::Independent(n, SymMatrix::Identity(1),
                                       SymMatrix::Identity(1));
}

PopulationConfig random_config(std::mt19937_64& gen, Index n, Index d) {
  return PopulationConfig::Independent(
      n, SymMatrix::Symmetrized(oracle::random_spd(gen, d)),
      SymMatrix::Symmetrized(oracle::random_spd(gen, d)));
}

oracle::Population to_oracle(const PopulationConfig& c) {
  return {c.v_xx.matrix(), c.v_xtheta, c.v_thetatheta.matrix(),
          c.u_thetatheta.matrix(), c.n};
}

oracle::Policies to_oracle(const Profile& p) {
  oracle::Policies out;
  for (const SensorPolicy& s : p) {
    out.a.push_back(s.a);
    out.b.push_back(s.b);
    out.noise.push_back(s.v_vv);
  }
  return out;
}

TEST(RegimeGuard, RejectsCorrelatedTypes) {
  PopulationConfig c = unit_config(3);
  c.u_thetatheta = SymMatrix::Diagonal(Vector::Constant(1, 0.2));
  EXPECT_THROW(symmetric_equilibrium(c), UnsupportedRegime);
  PopulationConfig d = unit_config(3);
  d.v_xtheta = Matrix::Constant(1, 1, 0.3);
  EXPECT_THROW(symmetric_equilibrium(d), UnsupportedRegime);
  EXPECT_THROW(best_response_map(d, symmetric_profile({Vector::Ones(1), Vector::Ones(1), 0.0}, 3), 0),
               UnsupportedRegime);
}

TEST(SymmetricEquilibrium, SingleSensorGoldens) {
  const SymmetricEquilibrium e = symmetric_equilibrium(unit_config(1));
  EXPECT_NEAR(e.policy.a(0), 0.8507, 1e-4);
  EXPECT_NEAR(e.policy.b(0), 0.5257, 1e-4);
  EXPECT_EQ(e.policy.v_vv, 0.0);
  // Same as the single-sensor static game without side information.
  const EquilibriumReport s = equilibrium_scalar(JointGaussian::WithoutSideChannel(
      Matrix::Ones(1, 1), Matrix::Zero(1, 1), Matrix::Ones(1, 1)));
  EXPECT_NEAR(e.policy.a(0), s.policy.alpha1(0, 0), 1e-12);
  EXPECT_NEAR(e.policy.b(0), s.policy.alpha2(0, 0), 1e-12);
  EXPECT_NEAR(e.receiver_error, s.receiver_error, 1e-12);
}

TEST(SymmetricEquilibrium, PublishedCoefficients) {
  for (Index n : {1, 2, 5, 10, 40}) {
    const SymmetricEquilibrium e = symmetric_equilibrium(unit_config(n));
    const double nn = static_cast<double>(n);
    const double denom = std::sqrt(0.7236 + 0.2763 * nn);
    EXPECT_NEAR(e.policy.a(0), 0.8506 / denom, 1e-3) << n;
    EXPECT_NEAR(e.policy.b(0), 0.5257 * nn / denom, 1e-3 * nn) << n;
  }
  const SymmetricEquilibrium ten = symmetric_equilibrium(unit_config(10));
  EXPECT_NEAR(ten.policy.a(0), 0.8507 / std::sqrt(0.7236 + 2.763), 1e-3);
  EXPECT_NEAR(ten.policy.b(0), 5.257 / std::sqrt(3.487), 1e-3);
}

TEST(SymmetricEquilibrium, RatioLinearAndNormalized) {
  const double r1 = symmetric_equilibrium(unit_config(1)).policy.b(0) /
                    symmetric_equilibrium(unit_config(1)).policy.a(0);
  std::mt19937_64 gen(4);
  const PopulationConfig base = random_config(gen, 1, 2);
  for (Index n = 1; n <= 30; ++n) {
    const SymmetricEquilibrium e = symmetric_equilibrium(unit_config(n));
    EXPECT_NEAR(e.policy.b(0) / e.policy.a(0), r1 * static_cast<double>(n), 1e-10);
    const SymmetricEquilibrium g = symmetric_equilibrium(base.with_n(n));
    EXPECT_NEAR(average_variance(base.with_n(n), symmetric_profile(g.policy, n)),
                1.0, 1e-12);
  }
}

TEST(SymmetricEquilibrium, MatchesDenseOracle) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 10; ++t) {
    const PopulationConfig c = random_config(gen, 1 + t % 6, 1 + t % 3);
    const SymmetricEquilibrium e = symmetric_equilibrium(c);
    const Profile p = symmetric_profile(e.policy, c.n);
    const oracle::Lms ref = oracle::average_lms(to_oracle(c), to_oracle(p));
    EXPECT_NEAR(e.receiver_error, ref.error_x, 1e-10);
    EXPECT_NEAR(e.receiver_error, equilibrium_error_formula(c), 1e-10);
    EXPECT_NEAR(e.sensor_cost, oracle::sensor_cost(to_oracle(c), to_oracle(p), 0), 1e-10);
  }
}

TEST(ErrorVsN, Goldens) {
  const std::vector<Index> ns{1, 10, 1000000};
  const std::vector<double> e = error_vs_n(unit_config(1), ns);
  EXPECT_NEAR(e[0], (5 - std::sqrt(5.0)) / 10, 1e-12);
  EXPECT_NEAR(e[0], 0.2764, 1e-4);
  EXPECT_NEAR(e[1], 0.7925, 1e-4);
  EXPECT_NEAR(e[2], 1.0, 1e-5);
}

TEST(ErrorVsN, PublishedCurveAndMonotone) {
  double prev = 0.0;
  for (Index n = 1; n <= 100; ++n) {
    const double e = symmetric_equilibrium(unit_config(n)).receiver_error;
    EXPECT_NEAR(e, oracle::e1_printed(static_cast<double>(n)), 1e-3);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(Eigenvector, BothBlocksNonzero) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 100; ++t) {
    const SymmetricEquilibrium e = symmetric_equilibrium(random_config(gen, 3, 1 + t % 3));
    const Index d = e.policy.a.size();
    EXPECT_GT(e.xi.head(d).norm(), 1e-8);
    EXPECT_GT(e.xi.tail(d).norm(), 1e-8);
  }
}

TEST(AverageSuffices, SingleSensorTrivial) {
  const SymmetricEquilibrium e = symmetric_equilibrium(unit_config(1));
  const AverageSufficesResult r =
      average_suffices_check(unit_config(1), symmetric_profile(e.policy, 1));
  EXPECT_LT(r.residual(), 1e-12);
}

TEST(AverageSuffices, RandomSymmetricPolicies) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Index d = 1 + t % 2;
    PopulationConfig c = random_config(gen, 5, d);
    // Correlated types and state-type coupling are allowed here.
    c.u_thetatheta = SymMatrix::Symmetrized(0.1 * c.v_thetatheta.matrix());
    c.v_xtheta = 0.05 * oracle::random_matrix(gen, d, d);
    ASSERT_NO_THROW(c.validate());
    const SensorPolicy p{oracle::random_matrix(gen, d, 1).col(0),
                         oracle::random_matrix(gen, d, 1).col(0), unit(gen)};
    const AverageSufficesResult r = average_suffices_check(c, symmetric_profile(p, 5));
    EXPECT_TRUE(r.applicable);
    EXPECT_LT(r.residual(), 1e-9);
    EXPECT_LT(r.gain_residual, 1e-9);
  }
}

TEST(AverageSuffices, HeterogeneousCounterexample) {
  const PopulationConfig c = unit_config(2);
  Profile p{{Vector::Ones(1), Vector::Zero(1), 0.1},
            {Vector::Zero(1), Vector::Ones(1), 0.1}};
  const AverageSufficesResult r = average_suffices_check(c, p);
  EXPECT_FALSE(r.applicable);
  EXPECT_LT(r.error_full, r.error_average - 1e-3);
}

TEST(BestResponseMap, EquilibriumIsFixedPoint) {
  for (Index n : {1, 2, 5, 10}) {
    const PopulationConfig c = unit_config(n);
    const SymmetricEquilibrium e = symmetric_equilibrium(c);
    const Profile p = symmetric_profile(e.policy, n);
    for (Index i = 0; i < n; ++i) {
      const SensorPolicy br = best_response_map(c, p, i);
      EXPECT_LT((br.a - e.policy.a).norm(), 1e-8);
      EXPECT_LT((br.b - e.policy.b).norm(), 1e-8);
      EXPECT_LT(std::abs(br.v_vv), 1e-8);
    }
  }
}

TEST(BestResponseMap, BabblingOthersReduceToSingleSensor) {
  std::mt19937_64 gen(8);
  for (Index n : {2, 4}) {
    const PopulationConfig c = random_config(gen, n, 2);
    const Index d = 2;
    Profile p = symmetric_profile({Vector::Zero(d), Vector::Zero(d), 1.0}, n);
    const SensorPolicy br = best_response_map(c, p, 0);
    const double rho = 1.0 - static_cast<double>(n - 1) / static_cast<double>(n * n);
    EXPECT_NEAR(remaining_budget(c, p, 0), rho, 1e-15);
    const EquilibriumReport s = equilibrium_no_side_channel(
        JointGaussian::WithoutSideChannel(c.v_xx.matrix(), Matrix::Zero(d, d),
                                          c.v_thetatheta.matrix()),
        1);
    const double k = static_cast<double>(n) * std::sqrt(rho);
    const double sign = br.a.dot(s.policy.alpha1.col(0)) >= 0 ? 1.0 : -1.0;
    EXPECT_LT((br.a - sign * k * s.policy.alpha1.col(0)).norm(), 1e-10);
    EXPECT_LT((br.b - sign * k * s.policy.alpha2.col(0)).norm(), 1e-10);
    EXPECT_NEAR(br.v_vv, 0.0, 1e-10);
  }
}

TEST(BestResponseMap, ExhaustedBudget) {
  const PopulationConfig c = unit_config(2);
  Profile p = symmetric_profile({Vector::Zero(1), Vector::Constant(1, 2.0), 0.0}, 2);
  const SensorPolicy br = best_response_map(c, p, 0);
  EXPECT_EQ(br.a.norm() + br.b.norm() + br.v_vv, 0.0);
  p[1].b(0) = 2.5;
  EXPECT_THROW(best_response_map(c, p, 0), InfeasibleOthers);
}

TEST(FixedPointCertificate, UnitConfigsPass) {
  for (Index n : {2, 5, 10}) {
    const FixedPointCertificate c = fixed_point_certificate(unit_config(n), 200, kDefaultSeed);
    EXPECT_TRUE(c.passed()) << n << " fp=" << c.fixed_point.worst_residual
                            << " dev=" << c.deviations.worst_residual
                            << " zero=" << c.forced_zero.worst_residual;
    EXPECT_GT(c.deviations.trials, 150);
    EXPECT_LT(c.forced_zero.worst_residual, 0.0);
  }
}

TEST(FixedPointCertificate, RandomConfigsPass) {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 5; ++t) {
    const FixedPointCertificate c =
        fixed_point_certificate(random_config(gen, 2 + t, 1 + t % 2), 200, 3);
    EXPECT_TRUE(c.passed()) << c.deviations.worst_residual;
  }
}

TEST(FixedPointCertificate, SignFlippedFamilyMember) {
  const PopulationConfig c = unit_config(5);
  SensorPolicy p = symmetric_equilibrium(c).policy;
  p.a = -p.a;
  p.b = -p.b;
  const FixedPointCertificate cert = profile_certificate(c, p, 100, 1);
  EXPECT_TRUE(cert.passed());
  EXPECT_LT(cert.fixed_point.worst_residual, 1e-8);
}

TEST(FixedPointCertificate, RescalingOwnMessageIsOffSurface) {
  // A sensor that scales its own message (others fixed) changes the
  // weighting inside ybar; this is outside the normalized deviation set.
  const FixedPointCertificate c = fixed_point_certificate(unit_config(2), 10, 1);
  EXPECT_GT(c.unnormalized_gain, 0.1);
}

TEST(MonteCarlo, AverageErrorMatchesClosedForm) {
  const PopulationConfig c = unit_config(5);
  const SymmetricEquilibrium e = symmetric_equilibrium(c);
  const MonteCarloEstimate mc = monte_carlo_average_error(
      c, symmetric_profile(e.policy, 5), e.receiver_gain.gain, 100000, kDefaultSeed);
  EXPECT_TRUE(mc.agrees_with(e.receiver_error, 3.0)) << mc.mean << " vs " << e.receiver_error;
}

}  // namespace
}  // namespace stratest
