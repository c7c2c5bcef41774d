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

#ifndef STRATEST_DYNAMIC_SINGLE_HPP_
#define STRATEST_DYNAMIC_SINGLE_HPP_

// Repeated game with Gauss-Markov state and type:
//   x[k] = A_x[k] x[k-1] + w_x[k],  theta[k] = A_theta[k] theta[k-1] + w_theta[k]
//   y[k] = C_yx[k] x[k] + C_ytheta[k] theta[k] + w_y[k]
// At every step a myopic sensor sends z[k] = C_zx x[k] + C_ztheta theta[k] + v[k]
// and the receiver runs a Kalman filter over (x, theta): predict, fold in
// y[k], then fold in z[k].

#include <cstdint>
#include <optional>
#include <vector>

#include "stratest/gaussian_core.hpp"
#include "stratest/static_single.hpp"

namespace stratest {

/// Per-step parameters. Each list holds either one entry (time invariant)
/// or `horizon` entries. Step 0 uses no transition: (x[0], theta[0]) is
/// drawn from initial_covariance.
struct DynamicModel {
  Index horizon = 1;
  std::vector<Matrix> a_x;
  std::vector<Matrix> a_theta;
  std::vector<Matrix> c_yx;
  std::vector<Matrix> c_ytheta;
  std::vector<SymMatrix> v_wx;
  std::vector<SymMatrix> v_wtheta;
  std::vector<SymMatrix> v_wy;
  SymMatrix initial_covariance;

  static DynamicModel TimeInvariant(Index horizon, const Matrix& a_x,
                                    const Matrix& a_theta, const Matrix& c_yx,
                                    const Matrix& c_ytheta,
                                    const SymMatrix& v_wx,
                                    const SymMatrix& v_wtheta,
                                    const SymMatrix& v_wy,
                                    const SymMatrix& initial_covariance);

  Index n_x() const { return initial_covariance.dim() / 2; }
  Index n_y() const { return c_yx.empty() ? 0 : c_yx.front().rows(); }

  /// blkdiag(A_x[k], A_theta[k]).
  Matrix transition(Index k) const;
  /// blkdiag(V_wx[k], V_wtheta[k]).
  SymMatrix process_noise(Index k) const;
  /// [C_yx[k] C_ytheta[k]].
  Matrix side_map(Index k) const;
  SymMatrix side_noise(Index k) const;

  /// Throws InvalidDimensions or InvalidCovariance.
  void validate() const;
};

enum class Stage { kPredicted, kSideUpdated, kSensorUpdated };

struct KalmanState {
  Index k = 0;
  Stage stage = Stage::kPredicted;
  Vector xhat;
  Vector thetahat;
  SymMatrix p;  // error covariance of (x, theta)
};

/// Step 0 before any measurement: zero means, P = initial covariance.
KalmanState initial_state(const DynamicModel& model);

/// P_pred = A P A' + blkdiag(V_wx, V_wtheta); means propagated by A.
KalmanState kalman_predict(const KalmanState& state, const DynamicModel& model,
                           Index k);

/// Folds in y[k]. Joseph-form covariance update.
/// Throws SingularInnovation.
KalmanState kalman_update_side(const KalmanState& state,
                               const DynamicModel& model, Index k,
                               const Vector& y);

struct StepEquilibrium {
  Matrix c_zx;      // n_z x n_x
  Matrix c_ztheta;  // n_z x n_x
  SymMatrix v_vv;
  double kappa = 1.0;
  EquilibriumReport report;  // static problem on the side-updated covariance

  Matrix c_z() const;
};

/// Myopic sensor equilibrium at a side-updated state, scaled by kappa.
StepEquilibrium step_equilibrium(const KalmanState& side_updated, Index n_z,
                                 double kappa = 1.0);

/// Folds in z[k]. Joseph-form covariance update.
/// Throws SingularInnovation.
KalmanState kalman_update_sensor(const KalmanState& state,
                                 const StepEquilibrium& eq, const Vector& z);

/// Covariances and equilibria of one step. They do not depend on the data,
/// so the whole schedule is computed once per model.
struct PlannedStep {
  SymMatrix p_predicted;
  SymMatrix p_side;
  SymMatrix p_posterior;
  Matrix side_gain;    // 2n_x x n_y
  Matrix sensor_gain;  // 2n_x x n_z
  StepEquilibrium eq;
};

/// kappas, when given, must have one entry per step.
std::vector<PlannedStep> plan_equilibria(
    const DynamicModel& model, Index n_z,
    const std::optional<std::vector<double>>& kappas = std::nullopt);

/// The static prior of (x[0], theta[0], y[0]) seen by the step-0 sensor.
JointGaussian step0_prior(const DynamicModel& model);

struct TrajectoryRow {
  Index k = 0;
  double trace_p_x = 0.0;  // filter's x-block error at step k
  MonteCarloEstimate empirical;
  double c_zx_norm = 0.0;
  double c_ztheta_norm = 0.0;
};

/// Simulates n_runs independent plays of the game: true state, side
/// measurements and equilibrium messages are sampled, and the receiver's
/// filter is run on them. Reports per-step empirical ||x - xhat||^2.
std::vector<TrajectoryRow> simulate_trajectory(const DynamicModel& model,
                                               Index n_z, std::uint64_t seed,
                                               Index n_runs);

}  // namespace stratest

#endif  // STRATEST_DYNAMIC_SINGLE_HPP_
