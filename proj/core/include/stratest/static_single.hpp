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

#ifndef STRATEST_STATIC_SINGLE_HPP_
#define STRATEST_STATIC_SINGLE_HPP_

// Single strategic sensor, one shot. The sensor observes (x, theta, y) and
// sends z = alpha1' x + alpha2' theta + alpha3' y + v; the receiver also
// sees the honest side channel y and forms the LMS estimate of x from (y, z).
// The sensor wants the receiver to estimate x + theta instead.

#include <cstdint>
#include <optional>

#include "stratest/certificate.hpp"
#include "stratest/gaussian_core.hpp"

namespace stratest {

/// Eigenvalues of V_vv in [-kNoiseClamp, 0) are rounded to zero.
inline constexpr double kNoiseClamp = 1e-9;

struct AffineSensorPolicy {
  Matrix alpha1;  // n_x x n_z, on x
  Matrix alpha2;  // n_x x n_z, on theta
  Matrix alpha3;  // n_y x n_z, on y
  SymMatrix v_vv;

  Index n_z() const { return alpha1.cols(); }
  /// [alpha1; alpha2; alpha3], rows in the prior's (x, theta, y) order.
  Matrix stacked() const;
  /// Splits a stacked coefficient matrix. The noise is PSD-clamped.
  static AffineSensorPolicy FromStacked(const Matrix& alpha, Index n_x,
                                        Index n_y, const SymMatrix& v_vv);
};

/// Quadratic program over message covariances xi = [V_xz; V_thetaz; V_yz]:
/// minimize tr(xi' W xi) subject to xi' Q xi <= I.
struct TrustRegionProblem {
  SymMatrix w;
  SymMatrix q;
  Matrix xi;           // [I 0 -V_xy V_yy^-1; 0 I -V_thetay V_yy^-1]
  SymMatrix xi_prime;  // Cov((x, theta) | y)
  SymMatrix j;         // inverse of xi_prime
};

TrustRegionProblem build_wq(const JointGaussian& prior);

/// Minimizer of tr(eta' E eta) over eta' eta <= I: the eigenvectors of the
/// n_z smallest eigenvalues of E, with columns whose eigenvalue is >= 0
/// set to zero.
struct UnitBallSolution {
  Matrix eta;
  Vector values;
  bool tie = false;
};

UnitBallSolution solve_unit_ball(const SymMatrix& e, Index n_z);

/// The whitened cost Xi'^{1/2} [[-I,-I],[-I,0]] Xi'^{1/2}.
SymMatrix whitened_cost(const SymMatrix& xi_prime);

/// Optimal message covariances xi for the full problem.
/// Throws InvalidDimensions if n_z is not in [1, 2 n_x].
Matrix solve_trust_region(const TrustRegionProblem& p, Index n_z);

struct EquilibriumReport {
  AffineSensorPolicy policy;
  LmsGain receiver_gain;  // estimate of x from m = (y, z)
  double receiver_error = 0.0;
  double sensor_cost = 0.0;
  Matrix v_xz;
  Matrix v_thetaz;
  Matrix v_yz;
  // Spectrum of the whitened cost used to build the policy. eigen_tie marks
  // a repeated eigenvalue at the selection boundary, in which case the
  // policy is one member of a larger equilibrium set.
  Vector eigenvalues;
  bool eigen_tie = false;
};

/// Equilibrium with the side channel entering the message.
EquilibriumReport equilibrium(const JointGaussian& prior, Index n_z);
/// Scalar message (n_z = 1).
EquilibriumReport equilibrium_scalar(const JointGaussian& prior);
/// Equilibrium with alpha3 = 0.
EquilibriumReport equilibrium_no_side_channel(const JointGaussian& prior,
                                              Index n_z);

/// Policy whose normalized message covariances are (v_xz, v_thetaz, v_yz).
/// Throws InfeasibleMessage when the implied noise is not PSD.
AffineSensorPolicy sensor_policy_from_covariances(const JointGaussian& prior,
                                                  const Matrix& v_xz,
                                                  const Matrix& v_thetaz,
                                                  const Matrix& v_yz);

/// kappa * gamma: coefficients times kappa, noise covariance times kappa^2.
AffineSensorPolicy scale_policy(const AffineSensorPolicy& policy,
                                double kappa);

/// Readout m = (y, z) as a linear function of (x, theta, y).
LinearReadout message_readout(const JointGaussian& prior,
                              const AffineSensorPolicy& policy);

/// Receiver's LMS response to a declared policy.
LmsGain receiver_response(const JointGaussian& prior,
                          const AffineSensorPolicy& policy);

double receiver_error(const JointGaussian& prior,
                      const AffineSensorPolicy& policy, const Matrix& gain);

/// E ||(x + theta) - gain * m||^2.
double sensor_cost(const JointGaussian& prior, const AffineSensorPolicy& policy,
                   const Matrix& gain);

/// The policy-independent part c of the sensor cost, so that for a
/// normalized policy with message covariances xi the cost is
/// tr(xi' W xi) + c.
double sensor_cost_constant(const JointGaussian& prior);

/// Receiver error when only y is available.
double side_channel_error(const JointGaussian& prior);

/// Recomputes the receiver response and fills a report for any policy.
EquilibriumReport evaluate_policy(const JointGaussian& prior,
                                  const AffineSensorPolicy& policy);

struct BestResponseCertificate {
  Certificate receiver;  // gain perturbations; residual = error decrease
  Certificate sensor;    // policy deviations; residual = cost decrease

  bool passed() const { return receiver.passed && sensor.passed; }
};

/// Random finite deviations of radius 1e-2 and 1e-1 around the declared
/// policy and gain. Each sensor deviation is re-answered by the receiver.
BestResponseCertificate best_response_certificate(
    const JointGaussian& prior, const EquilibriumReport& report, Index trials,
    std::uint64_t seed, double tolerance = 1e-6);

/// Both coefficient blocks of the scalar no-side-channel equilibrium are
/// nonzero (norm > 1e-8).
bool nondegenerate_gains_check(const JointGaussian& prior);

/// Simulated receiver error ||x - x_hat||^2 over `samples` draws.
MonteCarloEstimate monte_carlo_receiver_error(const JointGaussian& prior,
                                              const AffineSensorPolicy& policy,
                                              const Matrix& gain,
                                              Index samples,
                                              std::uint64_t seed);

/// Simulated sensor cost ||x + theta - x_hat||^2.
MonteCarloEstimate monte_carlo_sensor_cost(const JointGaussian& prior,
                                           const AffineSensorPolicy& policy,
                                           const Matrix& gain, Index samples,
                                           std::uint64_t seed);

}  // namespace stratest

#endif  // STRATEST_STATIC_SINGLE_HPP_
