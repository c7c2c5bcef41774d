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

#include "stratest/async_seq.hpp"

#include <string>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

// Rows of the message loadings on the full state (x, theta_1..theta_N).
Matrix message_rows(const AffineSensorPolicy& p, Index d, Index i,
                    Index dim) {
  Matrix h = Matrix::Zero(p.n_z(), dim);
  h.leftCols(d) = p.alpha1.transpose();
  h.middleCols(i * d, d) = p.alpha2.transpose();
  return h;
}

}  // namespace

SequentialResult sequential_equilibrium(
    const PopulationConfig& config, Index n_z,
    const std::optional<std::vector<double>>& kappas) {
  config.validate();
  if (n_z < 1) throw InvalidDimensions("sequential: n_z must be >= 1");
  if (kappas && kappas->size() != static_cast<std::size_t>(config.n)) {
    throw InvalidDimensions("sequential: need one kappa per sensor");
  }
  const Index d = config.n_x();
  SequentialResult out;
  out.n_x = d;
  SymMatrix p = config.state_covariance();
  const Index dim = p.dim();
  const double type_trace = config.v_thetatheta.trace();
  for (Index i = 1; i <= config.n; ++i) {
    SequentialStep step;
    step.i = i;
    std::vector<Index> idx(static_cast<std::size_t>(2 * d));
    for (Index k = 0; k < d; ++k) {
      idx[static_cast<std::size_t>(k)] = k;
      idx[static_cast<std::size_t>(d + k)] = i * d + k;
    }
    step.psi = p.select(idx);
    if (!is_positive_definite(step.psi)) {
      // The earlier messages pin x down to within the PD tolerance relative
      // to the type variance; the step problem is no longer well posed.
      throw SingularConditioning("sequential: Cov((x, theta_" + std::to_string(i) +
                                 ") | earlier messages) is numerically singular");
    }
    const JointGaussian local = JointGaussian::WithoutSideChannel(
        step.psi.block(0, d).matrix(), step.psi.matrix().block(0, d, d, d),
        step.psi.block(d, d).matrix());
    step.report = equilibrium_no_side_channel(local, n_z);
    step.policy = step.report.policy;
    if (kappas) {
      const double kappa = (*kappas)[static_cast<std::size_t>(i - 1)];
      if (kappa == 0.0) throw InvalidDimensions("sequential: kappa must be nonzero");
      step.policy = scale_policy(step.policy, kappa);
    }
    const Matrix h = message_rows(step.policy, d, i, dim);
    const Matrix ph = p.matrix() * h.transpose();
    const LmsGain g = lms_gain(p, ph, p.congruence(h) + step.policy.v_vv);
    step.state_gain = g.gain;
    p = g.error_covariance;
    step.error_after = p.block(0, d).trace();
    step.sensor_cost = step.error_after +
                       2.0 * p.matrix().block(0, i * d, d, d).trace() +
                       type_trace;
    out.steps.push_back(std::move(step));
  }
  out.posterior = p;
  return out;
}

std::vector<AsyncSyncRow> async_vs_sync_compare(const PopulationConfig& config,
                                                Index n_max) {
  require_independent_types(config);
  if (n_max < 1) throw InvalidDimensions("compare: n_max must be >= 1");
  const SequentialResult seq = sequential_equilibrium(config.with_n(n_max));
  std::vector<AsyncSyncRow> rows;
  for (Index n = 1; n <= n_max; ++n) {
    AsyncSyncRow row;
    row.n = n;
    row.async_error = seq.steps[static_cast<std::size_t>(n - 1)].error_after;
    row.sync_error = symmetric_equilibrium(config.with_n(n)).receiver_error;
    rows.push_back(row);
  }
  return rows;
}

MonteCarloEstimate monte_carlo_sequential_error(const PopulationConfig& config,
                                                const SequentialResult& result,
                                                Index samples,
                                                std::uint64_t seed) {
  if (result.steps.size() != static_cast<std::size_t>(config.n)) {
    throw InvalidDimensions("monte carlo: result does not match config");
  }
  const Index d = config.n_x();
  const Matrix s = GaussianSampler(config.state_covariance()).draw(samples, seed, 0);
  Matrix est = Matrix::Zero(samples, s.cols());
  for (const SequentialStep& step : result.steps) {
    const Matrix h = message_rows(step.policy, d, step.i, s.cols());
    Matrix y = s * h.transpose();
    if (step.policy.v_vv.matrix().cwiseAbs().maxCoeff() > 0.0) {
      y += GaussianSampler(step.policy.v_vv, false)
               .draw(samples, seed, static_cast<std::uint64_t>(step.i));
    }
    est += (y - est * h.transpose()) * step.state_gain.transpose();
  }
  const Matrix err = s.leftCols(d) - est.leftCols(d);
  return summarize(err.rowwise().squaredNorm());
}

}  // namespace stratest
