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

#ifndef STRATEST_MULTI_SYNC_HPP_
#define STRATEST_MULTI_SYNC_HPP_

// N sensors share the state x and each holds a private type theta_i. Sensor i
// sends the scalar y_i = a_i' x + b_i' theta_i + v_i. The receiver estimates x
// from the average ybar = (y_1 + ... + y_N) / N; for identical policies this
// loses nothing against the full vector.

#include <cstdint>
#include <span>
#include <vector>

#include "stratest/certificate.hpp"
#include "stratest/gaussian_core.hpp"

namespace stratest {

/// Population prior: Var(x) = V_xx, Cov(x, theta_i) = V_xtheta,
/// Var(theta_i) = V_thetatheta, Cov(theta_i, theta_j) = U_thetatheta (i != j).
struct PopulationConfig {
  Index n = 1;
  SymMatrix v_xx;
  Matrix v_xtheta;
  SymMatrix v_thetatheta;
  SymMatrix u_thetatheta;

  /// V_xtheta = 0 and U_thetatheta = 0.
  static PopulationConfig Independent(Index n, const SymMatrix& v_xx,
                                      const SymMatrix& v_thetatheta);

  Index n_x() const { return v_xx.dim(); }
  PopulationConfig with_n(Index n) const;
  /// Covariance of (x, theta_1, ..., theta_N). Throws InvalidCovariance
  /// when it is not PD.
  SymMatrix state_covariance() const;
  void validate() const;
};

/// Throws UnsupportedRegime unless V_xtheta = 0 and U_thetatheta = 0.
void require_independent_types(const PopulationConfig& config);

struct SensorPolicy {
  Vector a;  // on x
  Vector b;  // on own theta
  double v_vv = 0.0;
};

using Profile = std::vector<SensorPolicy>;

Profile symmetric_profile(const SensorPolicy& policy, Index n);

/// All messages y_1..y_N as a readout of (x, theta_1..theta_N).
LinearReadout population_readout(const PopulationConfig& config,
                                 std::span<const SensorPolicy> profile);
/// The average ybar as a readout of (x, theta_1..theta_N).
LinearReadout average_readout(const PopulationConfig& config,
                              std::span<const SensorPolicy> profile);

/// Var(ybar).
double average_variance(const PopulationConfig& config,
                        std::span<const SensorPolicy> profile);

/// Receiver's LMS gain on ybar.
LmsGain average_receiver(const PopulationConfig& config,
                         std::span<const SensorPolicy> profile);

/// E ||(x + theta_i) - K ybar||^2 with K the receiver's gain on ybar.
double sensor_cost(const PopulationConfig& config,
                   std::span<const SensorPolicy> profile, Index i);

struct SymmetricEquilibrium {
  SensorPolicy policy;
  Vector xi;  // unit eigenvector, (theta part; x part)
  double eigenvalue = 0.0;
  bool eigen_tie = false;
  LmsGain receiver_gain;  // on ybar
  double receiver_error = 0.0;
  double sensor_cost = 0.0;
};

/// The symmetric affine equilibrium; V_ybar_ybar = 1 and zero injected noise.
/// Throws UnsupportedRegime.
SymmetricEquilibrium symmetric_equilibrium(const PopulationConfig& config);

/// Receiver error at the symmetric equilibrium from the eigenvector alone:
/// tr(V_xx) - tr(V_xx^1/2 xi_2 xi_2' V_xx^1/2) / (1 + (N - 1) xi_1' xi_1).
double equilibrium_error_formula(const PopulationConfig& config);

/// Receiver error at the symmetric equilibrium for each N.
std::vector<double> error_vs_n(const PopulationConfig& config,
                               std::span<const Index> ns);

/// Sensor i's best affine response to the others' policies, keeping
/// V_ybar_ybar = 1. profile[i] is ignored. Throws InfeasibleOthers when the
/// others alone exceed the variance budget.
SensorPolicy best_response_map(const PopulationConfig& config,
                               std::span<const SensorPolicy> profile, Index i);

/// 1 - (1/N^2) sum_{j != i} (b_j' V_thetatheta b_j + V_vj).
double remaining_budget(const PopulationConfig& config,
                        std::span<const SensorPolicy> profile, Index i);

struct AverageSufficesResult {
  bool applicable = true;  // false for heterogeneous profiles
  double error_full = 0.0;
  double error_average = 0.0;
  // || K_full - (K_avg / N) 1' || for identical policies.
  double gain_residual = 0.0;

  double residual() const { return std::abs(error_full - error_average); }
};

AverageSufficesResult average_suffices_check(
    const PopulationConfig& config, std::span<const SensorPolicy> profile);

/// Puts sensor i's deviation (a, b) on the normalized surface: pads own noise
/// when Var(ybar) < 1, otherwise rescales (a, b) by the root t of
/// Var(ybar) = 1 closest to 1. Returns false when no real root exists.
bool normalize_deviation(const PopulationConfig& config, Profile& profile,
                         Index i);

struct FixedPointCertificate {
  Certificate fixed_point;  // || beta_i(gamma*) - gamma* ||
  Certificate deviations;   // sensor cost decrease over normalized deviations
  Certificate forced_zero;  // a_i = 0; residual = cost decrease (must be < 0)
  // Informational: best decrease found when sensor i rescales its own
  // message off the normalized surface.
  double unnormalized_gain = 0.0;
  // Informational: Gauss-Seidel best-response iteration from perturbed
  // starts; largest final distance to the equilibrium family.
  double iteration_distance = 0.0;
  Index iteration_sweeps = 0;

  bool passed() const {
    return fixed_point.passed && deviations.passed && forced_zero.passed;
  }
};

FixedPointCertificate fixed_point_certificate(const PopulationConfig& config,
                                              Index trials, std::uint64_t seed,
                                              double tolerance = 1e-6);

/// Certificate checks around an arbitrary symmetric profile (used for
/// tampered or alternative policies).
FixedPointCertificate profile_certificate(const PopulationConfig& config,
                                          const SensorPolicy& policy,
                                          Index trials, std::uint64_t seed,
                                          double tolerance = 1e-6);

/// Simulated ||x - K ybar||^2 with per-sensor sampling streams.
MonteCarloEstimate monte_carlo_average_error(
    const PopulationConfig& config, std::span<const SensorPolicy> profile,
    const Matrix& gain, Index samples, std::uint64_t seed);

}  // namespace stratest

#endif  // STRATEST_MULTI_SYNC_HPP_
