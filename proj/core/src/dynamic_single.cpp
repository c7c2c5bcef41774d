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

#include <string>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

template <typename T>
const T& at_step(const std::vector<T>& list, Index k, const char* what) {
  if (list.empty()) {
    throw InvalidDimensions(std::string("dynamic model: missing ") + what);
  }
  if (list.size() == 1) return list.front();
  if (k < 0 || k >= static_cast<Index>(list.size())) {
    throw InvalidDimensions(std::string("dynamic model: no ") + what +
                            " for step " + std::to_string(k));
  }
  return list[static_cast<std::size_t>(k)];
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Gain and Joseph-form posterior for measurement m = c s + noise.
struct MeasurementUpdate {
  Matrix gain;
  SymMatrix posterior;
};

MeasurementUpdate joseph_update(const SymMatrix& prior, const Matrix& c,
                                const SymMatrix& noise) {
  const Index n = prior.dim();
  if (c.rows() == 0) return {Matrix::Zero(n, 0), prior};
  const SymMatrix innovation = prior.congruence(c) + noise;
  LmsGain g;
  try {
    g = lms_gain(prior, prior.matrix() * c.transpose(), innovation);
  } catch (const SingularConditioning&) {
    throw SingularInnovation("innovation covariance is singular");
  }
  const Matrix i_kc = Matrix::Identity(n, n) - g.gain * c;
  return {g.gain, prior.congruence(i_kc) + noise.congruence(g.gain)};
}

void check_size(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw InvalidDimensions(std::string(what) + " has wrong dimension");
  }
}

}  // namespace

DynamicModel DynamicModel::TimeInvariant(
    Index horizon, const Matrix& a_x, const Matrix& a_theta, const Matrix& c_yx,
    const Matrix& c_ytheta, const SymMatrix& v_wx, const SymMatrix& v_wtheta,
    const SymMatrix& v_wy, const SymMatrix& initial_covariance) {
  DynamicModel m;
  m.horizon = horizon;
  m.a_x = {a_x};
  m.a_theta = {a_theta};
  m.c_yx = {c_yx};
  m.c_ytheta = {c_ytheta};
  m.v_wx = {v_wx};
  m.v_wtheta = {v_wtheta};
  m.v_wy = {v_wy};
  m.initial_covariance = initial_covariance;
  m.validate();
  return m;
}

Matrix DynamicModel::transition(Index k) const {
  return block_diag(at_step(a_x, k, "A_x"), at_step(a_theta, k, "A_theta"));
}

SymMatrix DynamicModel::process_noise(Index k) const {
  return SymMatrix::Symmetrized(block_diag(at_step(v_wx, k, "V_wx").matrix(),
                                           at_step(v_wtheta, k, "V_wtheta").matrix()));
}

Matrix DynamicModel::side_map(Index k) const {
  const Matrix& cx = at_step(c_yx, k, "C_yx");
  const Matrix& ct = at_step(c_ytheta, k, "C_ytheta");
  Matrix out(cx.rows(), cx.cols() + ct.cols());
  out << cx, ct;
  return out;
}

SymMatrix DynamicModel::side_noise(Index k) const {
  return at_step(v_wy, k, "V_wy");
}

void DynamicModel::validate() const {
  if (horizon < 1) throw InvalidDimensions("dynamic model: horizon < 1");
  const Index nx = n_x();
  if (nx < 1 || initial_covariance.dim() != 2 * nx) {
    throw InvalidDimensions("dynamic model: initial covariance must be 2n_x");
  }
  if (!is_positive_definite(initial_covariance)) {
    throw InvalidCovariance("dynamic model: initial covariance is not PD");
  }
  const Index ny = n_y();
  for (Index k = 0; k < horizon; ++k) {
    const Matrix a = transition(k);
    const Matrix c = side_map(k);
    const SymMatrix w = process_noise(k);
    const SymMatrix v = side_noise(k);
    if (a.rows() != 2 * nx || a.cols() != 2 * nx || w.dim() != 2 * nx ||
        c.rows() != ny || c.cols() != 2 * nx || v.dim() != ny) {
      throw InvalidDimensions("dynamic model: inconsistent sizes at step " +
                              std::to_string(k));
    }
    if (k > 0 && !is_positive_definite(w)) {
      throw InvalidCovariance("dynamic model: process noise is not PD");
    }
    if (ny > 0 && !is_positive_definite(v)) {
      throw InvalidCovariance("dynamic model: side-channel noise is not PD");
    }
  }
}

KalmanState initial_state(const DynamicModel& model) {
  KalmanState s;
  s.k = 0;
  s.stage = Stage::kPredicted;
  s.xhat = Vector::Zero(model.n_x());
  s.thetahat = Vector::Zero(model.n_x());
  s.p = model.initial_covariance;
  return s;
}

KalmanState kalman_predict(const KalmanState& state, const DynamicModel& model,
                           Index k) {
  if (state.stage != Stage::kSensorUpdated) {
    throw Error("kalman_predict: state must be sensor-updated");
  }
  const Matrix a = model.transition(k);
  if (a.cols() != state.p.dim()) {
    throw InvalidDimensions("kalman_predict: transition size mismatch");
  }
  const Index nx = model.n_x();
  KalmanState out;
  out.k = k;
  out.stage = Stage::kPredicted;
  out.xhat = a.topLeftCorner(nx, nx) * state.xhat;
  out.thetahat = a.bottomRightCorner(nx, nx) * state.thetahat;
  out.p = state.p.congruence(a) + model.process_noise(k);
  return out;
}

KalmanState kalman_update_side(const KalmanState& state,
                               const DynamicModel& model, Index k,
                               const Vector& y) {
  if (state.stage != Stage::kPredicted) {
    throw Error("kalman_update_side: state must be predicted");
  }
  const Matrix c = model.side_map(k);
  check_size(y, c.rows(), "side measurement");
  const MeasurementUpdate u = joseph_update(state.p, c, model.side_noise(k));
  const Index nx = model.n_x();
  Vector mean(2 * nx);
  mean << state.xhat, state.thetahat;
  if (c.rows() > 0) mean += u.gain * (y - c * mean);
  KalmanState out;
  out.k = k;
  out.stage = Stage::kSideUpdated;
  out.xhat = mean.head(nx);
  out.thetahat = mean.tail(nx);
  out.p = u.posterior;
  return out;
}

Matrix StepEquilibrium::c_z() const {
  Matrix out(c_zx.rows(), c_zx.cols() + c_ztheta.cols());
  out << c_zx, c_ztheta;
  return out;
}

StepEquilibrium step_equilibrium(const KalmanState& side_updated, Index n_z,
                                 double kappa) {
  if (side_updated.stage != Stage::kSideUpdated) {
    throw Error("step_equilibrium: state must be side-updated");
  }
  const Index nx = side_updated.p.dim() / 2;
  const Matrix& p = side_updated.p.matrix();
  const JointGaussian prior = JointGaussian::WithoutSideChannel(
      p.topLeftCorner(nx, nx), p.topRightCorner(nx, nx),
      p.bottomRightCorner(nx, nx));
  StepEquilibrium eq;
  eq.report = equilibrium_no_side_channel(prior, n_z);
  eq.kappa = kappa;
  eq.c_zx = kappa * eq.report.policy.alpha1.transpose();
  eq.c_ztheta = kappa * eq.report.policy.alpha2.transpose();
  eq.v_vv = eq.report.policy.v_vv * (kappa * kappa);
  return eq;
}

KalmanState kalman_update_sensor(const KalmanState& state,
                                 const StepEquilibrium& eq, const Vector& z) {
  if (state.stage != Stage::kSideUpdated) {
    throw Error("kalman_update_sensor: state must be side-updated");
  }
  const Matrix c = eq.c_z();
  if (c.cols() != state.p.dim()) {
    throw InvalidDimensions("kalman_update_sensor: message map size mismatch");
  }
  check_size(z, c.rows(), "sensor message");
  const MeasurementUpdate u = joseph_update(state.p, c, eq.v_vv);
  const Index nx = state.xhat.size();
  Vector mean(2 * nx);
  mean << state.xhat, state.thetahat;
  mean += u.gain * (z - c * mean);
  KalmanState out;
  out.k = state.k;
  out.stage = Stage::kSensorUpdated;
  out.xhat = mean.head(nx);
  out.thetahat = mean.tail(nx);
  out.p = u.posterior;
  return out;
}

std::vector<PlannedStep> plan_equilibria(
    const DynamicModel& model, Index n_z,
    const std::optional<std::vector<double>>& kappas) {
  model.validate();
  if (kappas && static_cast<Index>(kappas->size()) != model.horizon) {
    throw InvalidDimensions("plan_equilibria: one kappa per step required");
  }
  std::vector<PlannedStep> plan;
  plan.reserve(static_cast<std::size_t>(model.horizon));
  SymMatrix p = model.initial_covariance;
  for (Index k = 0; k < model.horizon; ++k) {
    PlannedStep step;
    step.p_predicted =
        k == 0 ? p : p.congruence(model.transition(k)) + model.process_noise(k);
    const MeasurementUpdate side =
        joseph_update(step.p_predicted, model.side_map(k), model.side_noise(k));
    step.side_gain = side.gain;
    step.p_side = side.posterior;
    KalmanState s;
    s.k = k;
    s.stage = Stage::kSideUpdated;
    s.p = step.p_side;
    const double kappa = kappas ? (*kappas)[static_cast<std::size_t>(k)] : 1.0;
    step.eq = step_equilibrium(s, n_z, kappa);
    const MeasurementUpdate sensor =
        joseph_update(step.p_side, step.eq.c_z(), step.eq.v_vv);
    step.sensor_gain = sensor.gain;
    step.p_posterior = sensor.posterior;
    p = step.p_posterior;
    plan.push_back(std::move(step));
  }
  return plan;
}

JointGaussian step0_prior(const DynamicModel& model) {
  model.validate();
  const SymMatrix& p0 = model.initial_covariance;
  const Matrix c = model.side_map(0);
  const Index n = p0.dim();
  const Index ny = c.rows();
  Matrix full(n + ny, n + ny);
  full.topLeftCorner(n, n) = p0.matrix();
  full.topRightCorner(n, ny) = p0.matrix() * c.transpose();
  full.bottomLeftCorner(ny, n) = c * p0.matrix();
  full.bottomRightCorner(ny, ny) =
      (p0.congruence(c) + model.side_noise(0)).matrix();
  return JointGaussian(n / 2, ny, SymMatrix::Symmetrized(full));
}

std::vector<TrajectoryRow> simulate_trajectory(const DynamicModel& model,
                                               Index n_z, std::uint64_t seed,
                                               Index n_runs) {
  const std::vector<PlannedStep> plan = plan_equilibria(model, n_z);
  const Index nx = model.n_x();
  const Index ny = model.n_y();
  // Columns are independent runs. Streams: 3k (state innovation), 3k+1
  // (side noise), 3k+2 (sensor noise).
  Matrix state =
      GaussianSampler(model.initial_covariance).draw(n_runs, seed, 0).transpose();
  Matrix mean = Matrix::Zero(2 * nx, n_runs);
  std::vector<TrajectoryRow> rows;
  for (Index k = 0; k < model.horizon; ++k) {
    const auto stream = static_cast<std::uint64_t>(3 * k);
    const PlannedStep& step = plan[static_cast<std::size_t>(k)];
    if (k > 0) {
      const Matrix a = model.transition(k);
      state = a * state + GaussianSampler(model.process_noise(k))
                              .draw(n_runs, seed, stream)
                              .transpose();
      mean = a * mean;
    }
    if (ny > 0) {
      const Matrix c = model.side_map(k);
      const Matrix y = c * state + GaussianSampler(model.side_noise(k))
                                       .draw(n_runs, seed, stream + 1)
                                       .transpose();
      mean += step.side_gain * (y - c * mean);
    }
    const Matrix cz = step.eq.c_z();
    const Matrix z = cz * state + GaussianSampler(step.eq.v_vv, false)
                                      .draw(n_runs, seed, stream + 2)
                                      .transpose();
    mean += step.sensor_gain * (z - cz * mean);

    TrajectoryRow row;
    row.k = k;
    row.trace_p_x = step.p_posterior.block(0, nx).trace();
    const Matrix err = state.topRows(nx) - mean.topRows(nx);
    row.empirical = summarize(err.colwise().squaredNorm().transpose());
    row.c_zx_norm = step.eq.c_zx.norm();
    row.c_ztheta_norm = step.eq.c_ztheta.norm();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stratest
