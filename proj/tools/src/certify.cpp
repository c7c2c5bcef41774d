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

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "experiments.hpp"
#include "stratest/async_seq.hpp"
#include "stratest/errors.hpp"
#include "stratest/herding.hpp"
#include "stratest/static_single.hpp"

namespace stratest::cli {
namespace {

constexpr std::array<double, 4> kKappas = {-3.0, -1.0, 0.5, 2.0};
constexpr double kIdentityThreshold = 1e-9;
constexpr double kStandardErrors = 3.0;

struct Row {
  std::string suite;
  std::string status;
  double residual = 0.0;
  double threshold = 0.0;
  std::string detail;
};

std::string witness_text(const Vector& w) {
  std::string s = "witness=[";
  for (Index i = 0; i < w.size(); ++i) {
    s += (i ? " " : "") + format_number(w(i));
  }
  return s + "]";
}

Row from_certificate(const Certificate& c) {
  Row r{c.suite, c.passed ? "PASS" : "FAIL", c.worst_residual, c.threshold,
        c.detail + "; trials=" + std::to_string(c.trials)};
  if (!c.passed && c.witness.size() > 0) r.detail += "; " + witness_text(c.witness);
  return r;
}

Row upper_bound(std::string suite, double residual, double threshold,
                std::string detail) {
  return {std::move(suite), residual <= threshold ? "PASS" : "FAIL", residual,
          threshold, std::move(detail)};
}

double z_score(const MonteCarloEstimate& mc, double value) {
  const double diff = std::abs(mc.mean - value);
  // A deterministic error (e.g. the receiver recovers x exactly) has zero
  // spread; only round-off is left to compare.
  if (diff <= 1e-12 * std::max(1.0, std::abs(value))) return 0.0;
  return diff / mc.standard_error;
}

// Loewner violation of lower <= upper: largest eigenvalue of lower - upper.
double order_violation(const SymMatrix& lower, const SymMatrix& upper) {
  return std::max(0.0, max_eigenvalue(lower - upper));
}

DynamicModel default_dynamic(const Config& config) {
  if (config.has("horizon")) return dynamic_model(config);
  auto s = [](double v) { return Matrix::Constant(1, 1, v); };
  auto q = [](double v) { return SymMatrix::Diagonal(Vector::Constant(1, v)); };
  return DynamicModel::TimeInvariant(20, s(0.9), s(0.8), s(1.0), s(0.0),
                                     q(0.2), q(0.1), q(1.0),
                                     SymMatrix::Identity(2));
}

// Cov((x, theta_i) | y_1..y_{i-1}) by one Schur complement on the history.
Matrix direct_psi(const PopulationConfig& c, const SequentialResult& res,
                  Index i) {
  const Index d = c.n_x();
  const Matrix s = c.state_covariance().matrix();
  Matrix t = Matrix::Zero(2 * d, s.rows());
  t.block(0, 0, d, d).setIdentity();
  t.block(d, i * d, d, d).setIdentity();
  const Matrix prior = t * s * t.transpose();
  if (i == 1) return prior;
  Index rows = 0;
  for (Index k = 0; k < i - 1; ++k) rows += res.steps[static_cast<std::size_t>(k)].policy.n_z();
  Matrix h = Matrix::Zero(rows, s.rows());
  Matrix r = Matrix::Zero(rows, rows);
  Index r0 = 0;
  for (Index k = 0; k < i - 1; ++k) {
    const AffineSensorPolicy& p = res.steps[static_cast<std::size_t>(k)].policy;
    h.block(r0, 0, p.n_z(), d) = p.alpha1.transpose();
    h.block(r0, (k + 1) * d, p.n_z(), d) = p.alpha2.transpose();
    r.block(r0, r0, p.n_z(), p.n_z()) = p.v_vv.matrix();
    r0 += p.n_z();
  }
  const Matrix vpp = h * s * h.transpose() + r;
  const Matrix vtp = t * s * h.transpose();
  return prior - vtp * vpp.ldlt().solve(vtp.transpose());
}

void static_suites(const Config& config, Index trials, std::uint64_t seed,
                   Index n_samples, std::vector<Row>& rows) {
  const JointGaussian prior = static_prior(config);
  const Index n_z = config.integer("n_z", 1);
  EquilibriumReport r = prior.n_y() > 0 ? equilibrium(prior, n_z)
                                        : equilibrium_no_side_channel(prior, n_z);
  const std::string tamper = config.string("tamper", "none");
  if (tamper == "zero_alpha2") {
    AffineSensorPolicy p = r.policy;
    p.alpha2.setZero();
    r = evaluate_policy(prior, p);
  } else if (tamper != "none") {
    throw ConfigError("unknown tamper '" + tamper + "'");
  }
  const BestResponseCertificate cert = best_response_certificate(prior, r, trials, seed);
  rows.push_back(from_certificate(cert.receiver));
  rows.push_back(from_certificate(cert.sensor));

  const JointGaussian plain = JointGaussian::WithoutSideChannel(
      prior.v_xx(), prior.v_xtheta(), prior.v_thetatheta());
  const EquilibriumReport scalar = equilibrium_no_side_channel(plain, 1);
  const double smallest =
      std::min(scalar.policy.alpha1.norm(), scalar.policy.alpha2.norm());
  rows.push_back({"static.nondegenerate", smallest > 1e-8 ? "PASS" : "FAIL",
                  smallest, 1e-8,
                  "lower bound: min(|alpha1|, |alpha2|) of the scalar message "
                  "must exceed threshold"});

  const MonteCarloEstimate mc = monte_carlo_receiver_error(
      prior, r.policy, r.receiver_gain.gain, n_samples, seed);
  rows.push_back(upper_bound("static.monte_carlo", z_score(mc, r.receiver_error),
                             kStandardErrors,
                             "|simulated - closed form| in standard errors; samples=" +
                                 std::to_string(n_samples)));

  double worst = 0.0;
  for (double kappa : kKappas) {
    const EquilibriumReport s = evaluate_policy(prior, scale_policy(r.policy, kappa));
    worst = std::max(worst, std::abs(s.receiver_error - r.receiver_error));
  }
  rows.push_back(upper_bound("scaling.static", worst, kIdentityThreshold,
                             "receiver error change under kappa in {-3,-1,0.5,2}"));
}

void dynamic_suites(const Config& config, std::uint64_t seed, Index n_samples,
                    std::vector<Row>& rows) {
  const DynamicModel model = default_dynamic(config);
  const Index n_z = config.integer("n_z", 1);
  const auto plan = plan_equilibria(model, n_z);
  double ordering = 0.0;
  for (const PlannedStep& s : plan) {
    ordering = std::max(ordering, std::max(0.0, -min_eigenvalue(s.p_posterior)));
    ordering = std::max(ordering, order_violation(s.p_posterior, s.p_side));
    ordering = std::max(ordering, order_violation(s.p_side, s.p_predicted));
  }
  rows.push_back(upper_bound("dynamic.ordering", ordering, kIdentityThreshold,
                             "P PSD and P <= P_side <= P_predicted at every step"));

  const JointGaussian prior0 = step0_prior(model);
  const EquilibriumReport ref = equilibrium_no_side_channel(prior0, n_z);
  const double step0 = std::max(
      {(plan[0].eq.c_zx - ref.policy.alpha1.transpose()).cwiseAbs().maxCoeff(),
       (plan[0].eq.c_ztheta - ref.policy.alpha2.transpose()).cwiseAbs().maxCoeff(),
       std::abs(plan[0].p_posterior.block(0, model.n_x()).trace() -
                ref.receiver_error)});
  rows.push_back(upper_bound("dynamic.static_reduction", step0, 1e-10,
                             "step 0 against the single-shot equilibrium"));

  double worst_z = 0.0;
  for (const TrajectoryRow& r : simulate_trajectory(model, n_z, seed, n_samples)) {
    worst_z = std::max(worst_z, z_score(r.empirical, r.trace_p_x));
  }
  rows.push_back(upper_bound("dynamic.monte_carlo", worst_z, kStandardErrors,
                             "max over steps of |simulated - trace P_x| in standard "
                             "errors; runs=" + std::to_string(n_samples)));

  double worst = 0.0;
  for (double kappa : kKappas) {
    const auto scaled = plan_equilibria(
        model, n_z, std::vector<double>(static_cast<std::size_t>(model.horizon), kappa));
    for (std::size_t k = 0; k < plan.size(); ++k) {
      worst = std::max(worst, (scaled[k].p_posterior - plan[k].p_posterior)
                                  .matrix()
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  rows.push_back(upper_bound("scaling.dynamic", worst, kIdentityThreshold,
                             "posterior covariance change under kappa in "
                             "{-3,-1,0.5,2} at every step"));
}

void skip(std::vector<Row>& rows, const std::string& suite, const std::string& why) {
  rows.push_back({suite, "SKIPPED", 0.0, 0.0, why});
}

void population_suites(const Config& config, Index trials, std::uint64_t seed,
                       Index n_samples, std::vector<Row>& rows) {
  const Index n = config.integer("n", 5);
  if (n < 1) throw ConfigError("certify: n must be >= 1");
  const PopulationConfig c = population(config, n);
  const Index d = c.n_x();

  bool regime = true;
  std::string why;
  try {
    require_independent_types(c);
  } catch (const UnsupportedRegime& e) {
    regime = false;
    why = std::string("UnsupportedRegime: ") + e.what();
  }
  if (regime) {
    const FixedPointCertificate fp = fixed_point_certificate(c, trials, seed);
    rows.push_back(from_certificate(fp.fixed_point));
    rows.push_back(from_certificate(fp.deviations));
    rows.push_back(from_certificate(fp.forced_zero));
    const SymmetricEquilibrium eq = symmetric_equilibrium(c);
    const Profile profile = symmetric_profile(eq.policy, n);
    const AverageSufficesResult avg = average_suffices_check(c, profile);
    rows.push_back(upper_bound("multisync.average_suffices", avg.residual(),
                               kIdentityThreshold,
                               "full-vector vs average receiver"));
    const MonteCarloEstimate mc = monte_carlo_average_error(
        c, profile, eq.receiver_gain.gain, n_samples, seed);
    rows.push_back(upper_bound("multisync.monte_carlo", z_score(mc, eq.receiver_error),
                               kStandardErrors, "|simulated - closed form| in standard errors"));
  } else {
    for (const char* s : {"multisync.fixed_point", "multisync.deviations",
                          "multisync.forced_zero", "multisync.average_suffices",
                          "multisync.monte_carlo"}) {
      skip(rows, s, why);
    }
  }

  SensorPolicy common{Vector::Ones(d), Vector::Ones(d), 0.0};
  if (regime) {
    const HerdingReport h = herding_equilibrium(c);
    common = h.policy;
    const MonteCarloEstimate mc = monte_carlo_average_error(
        c, symmetric_profile(h.policy, n), h.receiver_gain.gain, n_samples, seed);
    rows.push_back(upper_bound("herding.monte_carlo", z_score(mc, h.receiver_error),
                               kStandardErrors, "|simulated - closed form| in standard errors"));
  } else {
    skip(rows, "herding.monte_carlo", why);
  }
  rows.push_back(upper_bound("herding.decomposition",
                             cost_decomposition_check(c, common).residual(),
                             kIdentityThreshold,
                             regime ? "own-type vs average-type cost, herding policy"
                                    : "own-type vs average-type cost, a = b = 1"));

  const SequentialResult seq = sequential_equilibrium(c);
  double psi = 0.0;
  double rise = 0.0;
  double prev = c.v_xx.trace();
  for (const SequentialStep& s : seq.steps) {
    psi = std::max(psi, (s.psi.matrix() - direct_psi(c, seq, s.i)).cwiseAbs().maxCoeff());
    rise = std::max(rise, s.error_after - prev);
    prev = s.error_after;
  }
  rows.push_back(upper_bound("async.psi_direct", psi, kIdentityThreshold,
                             "recursive vs direct conditional covariance"));
  rows.push_back(upper_bound("async.monotone", std::max(0.0, rise), kIdentityThreshold,
                             "largest increase of the receiver error across steps"));
  double worst = 0.0;
  for (double kappa : kKappas) {
    const SequentialResult s = sequential_equilibrium(
        c, 1, std::vector<double>(static_cast<std::size_t>(n), kappa));
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      worst = std::max(worst, std::abs(s.steps[k].error_after - seq.steps[k].error_after));
    }
  }
  rows.push_back(upper_bound("scaling.sequential", worst, kIdentityThreshold,
                             "receiver error change under kappa in {-3,-1,0.5,2}"));
}

}  // namespace

RunResult run_certify(const Config& config) {
  std::set<std::string> allowed = {"v_xx", "v_xtheta", "v_thetatheta", "u_thetatheta",
                                   "v_xy", "v_thetay", "v_yy", "n_z", "n", "trials",
                                   "tamper", "horizon", "a_x", "a_theta", "c_yx",
                                   "c_ytheta", "v_wx", "v_wtheta", "v_wy",
                                   "initial_covariance"};
  config.require_only(allowed);
  const Index trials = config.integer("trials", 200);
  if (trials < 1) throw ConfigError("certify: trials must be >= 1");
  const std::uint64_t seed = config.seed();
  const Index n_samples = samples(config);

  std::vector<Row> rows;
  static_suites(config, trials, seed, n_samples, rows);
  dynamic_suites(config, seed, n_samples, rows);
  population_suites(config, trials, seed, n_samples, rows);

  RunResult out;
  out.table.header = {"suite", "status", "worst_residual", "threshold", "detail"};
  for (const Row& r : rows) {
    out.table.add({r.suite, r.status, r.residual, r.threshold, r.detail});
    if (r.status == "FAIL") out.passed = false;
  }
  return out;
}

}  // namespace stratest::cli
