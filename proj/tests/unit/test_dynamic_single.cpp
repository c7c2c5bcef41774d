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

#include "stratest/dynamic_single.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stratest/errors.hpp"

namespace stratest {
namespace {

Matrix s1(double v) { return Matrix::Constant(1, 1, v); }
SymMatrix q1(double v) { return SymMatrix::Diagonal(Vector::Constant(1, v)); }

DynamicModel scalar_model(Index horizon) {
  return DynamicModel::TimeInvariant(horizon, s1(0.9), s1(0.8), s1(1.0), s1(0.5),
                                     q1(1.0), q1(0.5), q1(2.0),
                                     SymMatrix::Identity(2));
}

KalmanState posterior(const SymMatrix& p) {
  KalmanState s;
  s.stage = Stage::kSensorUpdated;
  s.xhat = Vector::Zero(p.dim() / 2);
  s.thetahat = Vector::Zero(p.dim() / 2);
  s.p = p;
  return s;
}

KalmanState side_updated(const SymMatrix& p) {
  KalmanState s = posterior(p);
  s.stage = Stage::kSideUpdated;
  return s;
}

TEST(KalmanPredict, IdentityWithoutNoiseKeepsState) {
  DynamicModel m;
  m.horizon = 2;
  m.a_x = {s1(1)};
  m.a_theta = {s1(1)};
  m.c_yx = {Matrix::Zero(0, 1)};
  m.c_ytheta = {Matrix::Zero(0, 1)};
  m.v_wx = {q1(0)};
  m.v_wtheta = {q1(0)};
  m.v_wy = {SymMatrix::Zero(0)};
  m.initial_covariance = SymMatrix::Identity(2);
  KalmanState s = posterior(SymMatrix(Matrix{{2.0, 0.3}, {0.3, 1.0}}));
  s.xhat << 1.5;
  const KalmanState out = kalman_predict(s, m, 1);
  EXPECT_EQ((out.p.matrix() - s.p.matrix()).norm(), 0.0);
  EXPECT_EQ(out.xhat(0), 1.5);
  EXPECT_EQ(out.stage, Stage::kPredicted);
}

TEST(KalmanPredict, ScalarGolden) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      2, s1(2.0), s1(1.0), Matrix::Zero(0, 1), Matrix::Zero(0, 1), q1(1.0),
      q1(0.5), SymMatrix::Zero(0), SymMatrix::Identity(2));
  const KalmanState out = kalman_predict(posterior(SymMatrix::Identity(2)), m, 1);
  EXPECT_DOUBLE_EQ(out.p(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(out.p(1, 1), 1.5);
  EXPECT_TRUE(is_positive_semidefinite(out.p));
}

TEST(KalmanPredict, RequiresPosterior) {
  EXPECT_THROW(kalman_predict(initial_state(scalar_model(2)), scalar_model(2), 1),
               Error);
}

TEST(KalmanUpdateSide, ZeroMapIsNoOp) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      1, s1(1), s1(1), s1(0), s1(0), q1(1), q1(1), q1(1), SymMatrix::Identity(2));
  KalmanState s = initial_state(m);
  const KalmanState out = kalman_update_side(s, m, 0, Vector::Constant(1, 3.0));
  EXPECT_LE((out.p.matrix() - s.p.matrix()).norm(), 1e-15);
  EXPECT_EQ(out.xhat(0), 0.0);
}

TEST(KalmanUpdateSide, ExactObservationLimit) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      1, s1(1), s1(1), s1(1), s1(0), q1(1), q1(1), q1(1e-12),
      SymMatrix(Matrix{{1.0, 0.4}, {0.4, 2.0}}));
  const KalmanState out =
      kalman_update_side(initial_state(m), m, 0, Vector::Constant(1, 0.7));
  EXPECT_LT(out.p(0, 0), 1e-6);
  EXPECT_NEAR(out.xhat(0), 0.7, 1e-6);
}

TEST(KalmanUpdateSide, ScalarHalving) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      1, s1(1), s1(1), s1(1), s1(0), q1(1), q1(1), q1(1), SymMatrix::Identity(2));
  const KalmanState out =
      kalman_update_side(initial_state(m), m, 0, Vector::Constant(1, 1.0));
  EXPECT_NEAR(out.p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(out.p(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(out.xhat(0), 0.5, 1e-15);
}

TEST(KalmanUpdateSide, JosephMatchesShortForm) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix p0 = SymMatrix::Symmetrized(oracle::random_spd(gen, 4));
    const Matrix c = oracle::random_matrix(gen, 2, 4);
    DynamicModel m;
    m.horizon = 1;
    m.a_x = {Matrix::Identity(2, 2)};
    m.a_theta = {Matrix::Identity(2, 2)};
    m.c_yx = {c.leftCols(2)};
    m.c_ytheta = {c.rightCols(2)};
    m.v_wx = {SymMatrix::Identity(2)};
    m.v_wtheta = {SymMatrix::Identity(2)};
    m.v_wy = {SymMatrix::Symmetrized(oracle::random_spd(gen, 2))};
    m.initial_covariance = p0;
    const KalmanState out =
        kalman_update_side(initial_state(m), m, 0, Vector::Zero(2));
    const Matrix s = c * p0.matrix() * c.transpose() + m.v_wy[0].matrix();
    const Matrix k = p0.matrix() * c.transpose() * s.inverse();
    const Matrix short_form = (Matrix::Identity(4, 4) - k * c) * p0.matrix();
    EXPECT_LE((out.p.matrix() - short_form).norm(), 1e-10);
  }
}

TEST(StepEquilibrium, ReducesToStaticAtStepZero) {
  const SymMatrix p0(Matrix{{1.3, 0.2}, {0.2, 0.9}});
  const StepEquilibrium eq = step_equilibrium(side_updated(p0), 1);
  const EquilibriumReport ref = equilibrium_no_side_channel(
      JointGaussian::WithoutSideChannel(s1(1.3), s1(0.2), s1(0.9)), 1);
  EXPECT_EQ(eq.c_zx(0, 0), ref.policy.alpha1(0, 0));
  EXPECT_EQ(eq.c_ztheta(0, 0), ref.policy.alpha2(0, 0));
  EXPECT_EQ(eq.v_vv(0, 0), ref.policy.v_vv(0, 0));
}

TEST(StepEquilibrium, BlockDiagonalGolden) {
  const double px = 0.7;
  const double pt = 1.9;
  const StepEquilibrium eq =
      step_equilibrium(side_updated(SymMatrix(Matrix{{px, 0}, {0, pt}})), 1);
  const oracle::Eig2 e = oracle::smallest_eig_2x2(-px, -std::sqrt(px * pt), 0.0);
  EXPECT_NEAR(eq.c_zx(0, 0), e.v0 / std::sqrt(px), 1e-12);
  EXPECT_NEAR(eq.c_ztheta(0, 0), e.v1 / std::sqrt(pt), 1e-12);
  EXPECT_NEAR(eq.v_vv(0, 0), 0.0, 1e-12);
}

TEST(StepEquilibrium, ScaledStepsKeepPosterior) {
  const DynamicModel m = scalar_model(8);
  const auto base = plan_equilibria(m, 1);
  const auto scaled =
      plan_equilibria(m, 1, std::vector<double>{-3, -1, 0.5, 2, 2, 0.5, -1, -3});
  for (std::size_t k = 0; k < base.size(); ++k) {
    EXPECT_LE((base[k].p_posterior.matrix() - scaled[k].p_posterior.matrix()).norm(),
              1e-12);
  }
}

TEST(KalmanUpdateSensor, ZeroMapIsNoOp) {
  StepEquilibrium eq;
  eq.c_zx = Matrix::Zero(1, 1);
  eq.c_ztheta = Matrix::Zero(1, 1);
  eq.v_vv = SymMatrix::Identity(1);
  const KalmanState s = side_updated(SymMatrix(Matrix{{1.0, 0.2}, {0.2, 1.0}}));
  const KalmanState out = kalman_update_sensor(s, eq, Vector::Constant(1, 2.0));
  EXPECT_LE((out.p.matrix() - s.p.matrix()).norm(), 1e-15);
  EXPECT_EQ(out.xhat(0), 0.0);
}

TEST(KalmanUpdateSensor, NoiselessRankOneReduction) {
  const SymMatrix p(Matrix{{0.8, 0.1}, {0.1, 1.2}});
  const KalmanState s = side_updated(p);
  const StepEquilibrium eq = step_equilibrium(s, 1);
  const KalmanState out = kalman_update_sensor(s, eq, Vector::Zero(1));
  const Vector c = eq.c_z().row(0).transpose();
  const Vector pc = p.matrix() * c;
  EXPECT_NEAR(c.dot(pc), 1.0, 1e-12);
  const Matrix expected = p.matrix() - pc * pc.transpose() / c.dot(pc);
  EXPECT_LE((out.p.matrix() - expected).norm(), 1e-10);
  EXPECT_TRUE(loewner_leq(out.p, p, 1e-12));
}

TEST(PlanEquilibria, StagesOrderedAndPsd) {
  const auto plan = plan_equilibria(scalar_model(20), 1);
  for (const PlannedStep& s : plan) {
    EXPECT_TRUE(is_positive_semidefinite(s.p_predicted, 1e-10));
    EXPECT_TRUE(is_positive_semidefinite(s.p_side, 1e-10));
    EXPECT_TRUE(is_positive_semidefinite(s.p_posterior, 1e-10));
    EXPECT_TRUE(loewner_leq(s.p_side, s.p_predicted, 1e-10));
    EXPECT_TRUE(loewner_leq(s.p_posterior, s.p_side, 1e-10));
  }
}

TEST(PlanEquilibria, TimeInvariantConverges) {
  const auto plan = plan_equilibria(scalar_model(200), 1);
  for (std::size_t k = 100; k < plan.size(); ++k) {
    EXPECT_LT((plan[k].p_posterior.matrix() - plan[k - 1].p_posterior.matrix()).norm(),
              1e-8);
  }
}

TEST(PlanEquilibria, HorizonOneReproducesStatic) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      1, s1(1), s1(1), s1(1.0), s1(0.5), q1(1), q1(1), q1(0.7),
      SymMatrix(Matrix{{1.2, 0.3}, {0.3, 0.8}}));
  const auto plan = plan_equilibria(m, 1);
  const JointGaussian prior = step0_prior(m);
  const EquilibriumReport ref = equilibrium_no_side_channel(prior, 1);
  EXPECT_NEAR(plan[0].eq.c_zx(0, 0), ref.policy.alpha1(0, 0), 1e-10);
  EXPECT_NEAR(plan[0].eq.c_ztheta(0, 0), ref.policy.alpha2(0, 0), 1e-10);
  EXPECT_NEAR(plan[0].p_posterior(0, 0), ref.receiver_error, 1e-10);
  EXPECT_NEAR(plan[0].p_posterior(0, 0), equilibrium_scalar(prior).receiver_error,
              1e-10);
}

TEST(SimulateTrajectory, EmpiricalErrorTracksFilter) {
  const auto rows = simulate_trajectory(scalar_model(20), 1, kDefaultSeed, 10000);
  ASSERT_EQ(rows.size(), 20u);
  for (const TrajectoryRow& r : rows) {
    EXPECT_TRUE(r.empirical.agrees_with(r.trace_p_x, 3.0))
        << "k=" << r.k << " " << r.empirical.mean << " vs " << r.trace_p_x;
    EXPECT_GT(r.c_zx_norm, 0.0);
    EXPECT_GT(r.c_ztheta_norm, 0.0);
  }
}

TEST(SimulateTrajectory, Deterministic) {
  const auto a = simulate_trajectory(scalar_model(5), 1, 9, 500);
  const auto b = simulate_trajectory(scalar_model(5), 1, 9, 500);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].empirical.mean, b[k].empirical.mean);
  }
}

TEST(DynamicModel, ValidatesShapes) {
  EXPECT_THROW(DynamicModel::TimeInvariant(3, s1(1), s1(1), Matrix::Ones(1, 2),
                                           s1(1), q1(1), q1(1), q1(1),
                                           SymMatrix::Identity(2)),
               InvalidDimensions);
  EXPECT_THROW(DynamicModel::TimeInvariant(3, s1(1), s1(1), s1(1), s1(1), q1(0),
                                           q1(1), q1(1), SymMatrix::Identity(2)),
               InvalidCovariance);
}

}  // namespace
}  // namespace stratest
