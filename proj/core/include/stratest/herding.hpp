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

#ifndef STRATEST_HERDING_HPP_
#define STRATEST_HERDING_HPP_

// Herding: all N sensors commit to one common policy and deviations are
// evaluated jointly. The population then acts as a single aggregate sensor
// whose type is the average theta_bar, with Var(theta_bar) = V_thetatheta / N.

#include <cmath>
#include <optional>
#include <vector>

#include "stratest/multi_sync.hpp"
#include "stratest/static_single.hpp"

namespace stratest {

struct HerdingReport {
  SensorPolicy policy;  // common (a*, b*), zero injected noise
  Vector zeta;          // unit eigenvector, (theta part; x part)
  LmsGain receiver_gain;
  double receiver_error = 0.0;
  // tr(V_xx) - || V_xx^1/2 zeta_x ||^2, from the eigenvector alone.
  double error_formula = 0.0;
  // Only for V_xx = eta_x I and V_thetatheta = eta_theta I.
  std::optional<double> varsigma;
  bool eigen_tie = false;
};

/// Throws UnsupportedRegime.
HerdingReport herding_equilibrium(const PopulationConfig& config);

struct DecompositionCheck {
  double own_type_cost = 0.0;      // E ||(x + theta_i) - x_hat||^2
  double average_type_cost = 0.0;  // E ||(x + theta_bar) - x_hat||^2
  double correction = 0.0;         // ((N - 1) / N) tr(V_tt - U)
  double residual() const {
    return std::abs(own_type_cost - average_type_cost - correction);
  }
};

/// Both sides of the own-type / average-type cost split for a common
/// policy, with x_hat the LMS estimate from all messages. Valid for any
/// V_xtheta and U_thetatheta.
DecompositionCheck cost_decomposition_check(const PopulationConfig& config,
                                            const SensorPolicy& policy);

/// Share of eta_x recovered by the herding equilibrium in the isotropic
/// regime. With kappa = eta_x eta_theta / N and s = sqrt(eta_x^2 + 4 kappa):
/// (eta_x^2 + 2 kappa + eta_x s) / (eta_x^2 + 4 kappa + eta_x s).
double varsigma(double n, double eta_x, double eta_theta);

/// Receiver error sigma / (sigma + N) of N honest sensors whose noise
/// variance is sigma (unit-variance state).
double baseline_noisy_honest(double n, double sigma);

/// Best unilateral improvement available to one sensor when the others
/// herd (normalized surface, ybar receiver). Positive values witness that
/// herding is not a best-response fixed point.
double breakaway_gain(const PopulationConfig& config);

struct ErrorCurveRow {
  Index n = 1;
  double e1 = 0.0;  // symmetric unilateral equilibrium
  double e2 = 0.0;  // herding
  double e3 = 0.0;  // noisy honest sensors
  double ratio_e2_e3 = 0.0;
};

/// Unit scalar variances, N = 1..n_max.
std::vector<ErrorCurveRow> error_curves(Index n_max, double sigma);

}  // namespace stratest

#endif  // STRATEST_HERDING_HPP_
