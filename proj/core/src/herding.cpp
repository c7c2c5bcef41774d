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

#include "stratest/herding.hpp"

#include <cmath>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

bool isotropic(const SymMatrix& m) {
  const double eta = m(0, 0);
  return (m.matrix() - eta * Matrix::Identity(m.dim(), m.dim()))
             .cwiseAbs()
             .maxCoeff() <= 1e-14 * std::max(1.0, std::abs(eta));
}

}  // namespace

HerdingReport herding_equilibrium(const PopulationConfig& config) {
  require_independent_types(config);
  const Index d = config.n_x();
  const double n = static_cast<double>(config.n);
  // The aggregate sensor sees x and theta_bar.
  const JointGaussian aggregate = JointGaussian::WithoutSideChannel(
      config.v_xx.matrix(), Matrix::Zero(d, d),
      config.v_thetatheta.matrix() / n);
  const EquilibriumReport r = equilibrium_no_side_channel(aggregate, 1);
  HerdingReport out;
  out.policy.a = r.policy.alpha1.col(0);
  out.policy.b = r.policy.alpha2.col(0);
  out.policy.v_vv = 0.0;
  out.eigen_tie = r.eigen_tie;
  // Recover the eigenvector in (theta; x) order and fix its sign there.
  out.zeta.resize(2 * d);
  out.zeta << matrix_sqrt(aggregate.covariance().block(d, d)).matrix() *
                  out.policy.b,
      matrix_sqrt(config.v_xx).matrix() * out.policy.a;
  const Vector before = out.zeta;
  canonicalize_sign(out.zeta);
  if (out.zeta.dot(before) < 0.0) {
    out.policy.a = -out.policy.a;
    out.policy.b = -out.policy.b;
  }
  // Common policy, independent types: ybar = a'x + b'theta_bar.
  const Vector v_xm = config.v_xx.matrix() * out.policy.a;
  const double v_mm = out.policy.a.dot(v_xm) +
                      out.policy.b.dot(config.v_thetatheta.matrix() * out.policy.b) / n;
  out.receiver_gain =
      lms_gain(config.v_xx, v_xm, SymMatrix(Matrix::Constant(1, 1, v_mm)));
  out.receiver_error = out.receiver_gain.error();
  out.error_formula =
      config.v_xx.trace() -
      (matrix_sqrt(config.v_xx).matrix() * out.zeta.tail(d)).squaredNorm();
  if (isotropic(config.v_xx) && isotropic(config.v_thetatheta)) {
    out.varsigma = varsigma(n, config.v_xx(0, 0), config.v_thetatheta(0, 0));
  }
  return out;
}

DecompositionCheck cost_decomposition_check(const PopulationConfig& config,
                                            const SensorPolicy& policy) {
  config.validate();
  const Index d = config.n_x();
  const double n = static_cast<double>(config.n);
  const Profile profile = symmetric_profile(policy, config.n);
  const SymMatrix s = config.state_covariance();
  const LinearReadout readout = population_readout(config, profile);
  Matrix x_target = Matrix::Zero(d, s.dim());
  x_target.leftCols(d).setIdentity();
  const Matrix gain = lms_for_target(s, x_target, readout).gain;

  Matrix own = x_target;
  own.middleCols(d, d) += Matrix::Identity(d, d);
  Matrix avg = x_target;
  for (Index j = 0; j < config.n; ++j) {
    avg.middleCols((j + 1) * d, d) += Matrix::Identity(d, d) / n;
  }
  DecompositionCheck out;
  out.own_type_cost = expected_squared_error(s, own, readout, gain);
  out.average_type_cost = expected_squared_error(s, avg, readout, gain);
  out.correction =
      (n - 1.0) / n * (config.v_thetatheta - config.u_thetatheta).trace();
  return out;
}

double varsigma(double n, double eta_x, double eta_theta) {
  if (!(n >= 1.0) || !(eta_x > 0.0) || !(eta_theta > 0.0)) {
    throw InvalidDimensions("varsigma: need N >= 1 and positive variances");
  }
  const double kappa = eta_x * eta_theta / n;
  const double s = std::sqrt(eta_x * eta_x + 4.0 * kappa);
  return (eta_x * eta_x + 2.0 * kappa + eta_x * s) /
         (eta_x * eta_x + 4.0 * kappa + eta_x * s);
}

double baseline_noisy_honest(double n, double sigma) {
  if (!(sigma > 0.0) || !(n >= 1.0)) {
    throw InvalidDimensions("baseline: need sigma > 0 and N >= 1");
  }
  return sigma / (sigma + n);
}

double breakaway_gain(const PopulationConfig& config) {
  const HerdingReport h = herding_equilibrium(config);
  const Profile herd = symmetric_profile(h.policy, config.n);
  Profile dev = herd;
  dev[0] = best_response_map(config, herd, 0);
  return sensor_cost(config, herd, 0) - sensor_cost(config, dev, 0);
}

std::vector<ErrorCurveRow> error_curves(Index n_max, double sigma) {
  std::vector<ErrorCurveRow> rows;
  const PopulationConfig unit = PopulationConfig::Independent(
      1, SymMatrix::Identity(1), SymMatrix::Identity(1));
  for (Index n = 1; n <= n_max; ++n) {
    ErrorCurveRow row;
    row.n = n;
    const PopulationConfig c = unit.with_n(n);
    row.e1 = equilibrium_error_formula(c);
    row.e2 = herding_equilibrium(c).receiver_error;
    row.e3 = baseline_noisy_honest(static_cast<double>(n), sigma);
    row.ratio_e2_e3 = row.e2 / row.e3;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stratest
