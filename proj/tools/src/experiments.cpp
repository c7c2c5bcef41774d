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

#include "experiments.hpp"

#include <cmath>
#include <limits>

#include "stratest/async_seq.hpp"
#include "stratest/herding.hpp"
#include "stratest/static_single.hpp"

namespace stratest::cli {
namespace {

const std::set<std::string> kPriorKeys = {"v_xx", "v_xtheta", "v_thetatheta",
                                          "v_xy", "v_thetay", "v_yy", "n_z"};
const std::set<std::string> kPopulationKeys = {
    "v_xx", "v_xtheta", "v_thetatheta", "u_thetatheta", "n_min", "n_max"};
const std::set<std::string> kDynamicKeys = {
    "horizon", "a_x",  "a_theta", "c_yx", "c_ytheta", "v_wx",
    "v_wtheta", "v_wy", "initial_covariance", "n_z"};

std::int64_t as_int(Index v) { return static_cast<std::int64_t>(v); }

void add_matrix(Table& t, const std::string& name, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      t.add({name + "[" + std::to_string(i) + "," + std::to_string(j) + "]",
             m(i, j)});
    }
  }
}

// Closed-form scalar gains for V_xx = 1, V_thetatheta = mu^2 + 1,
// V_xtheta = mu.
Vector closed_form_gains(double mu) {
  const double s = std::sqrt((2.0 * mu + 1.0) * (2.0 * mu + 1.0) + 4.0);
  const double norm =
      std::sqrt((2.0 * mu + s + 1.0) * (2.0 * mu + s + 1.0) + 4.0);
  Vector a(2);
  a << (s + 1.0) / norm, 2.0 / norm;
  return a;
}

std::pair<Index, Index> n_range(const Config& config) {
  const Index lo = config.integer("n_min", 1);
  const Index hi = config.integer("n_max", 10);
  if (lo < 1 || hi < lo) throw ConfigError("need 1 <= n_min <= n_max");
  return {lo, hi};
}

}  // namespace

Index samples(const Config& config) {
  const Index n = config.integer("samples", kDefaultSamples);
  if (n < kMinSamples) {
    throw ConfigError("samples must be at least " + std::to_string(kMinSamples));
  }
  return n;
}

JointGaussian static_prior(const Config& config) {
  const Matrix v_xx = config.covariance("v_xx").matrix();
  const Index d = v_xx.rows();
  const Matrix v_xtheta = config.matrix("v_xtheta", Matrix::Zero(d, d));
  const Matrix v_tt = config.covariance("v_thetatheta").matrix();
  if (!config.has("v_yy")) {
    return JointGaussian::WithoutSideChannel(v_xx, v_xtheta, v_tt);
  }
  const Matrix v_yy = config.covariance("v_yy").matrix();
  const Index ny = v_yy.rows();
  return JointGaussian::FromBlocks(v_xx, v_xtheta,
                                   config.matrix("v_xy", Matrix::Zero(d, ny)),
                                   v_tt,
                                   config.matrix("v_thetay", Matrix::Zero(d, ny)),
                                   v_yy);
}

PopulationConfig population(const Config& config, Index n) {
  PopulationConfig p;
  p.n = n;
  p.v_xx = config.covariance("v_xx");
  const Index d = p.v_xx.dim();
  p.v_thetatheta = config.covariance("v_thetatheta");
  p.v_xtheta = config.matrix("v_xtheta", Matrix::Zero(d, d));
  p.u_thetatheta = config.covariance("u_thetatheta", SymMatrix::Zero(d));
  p.validate();
  return p;
}

DynamicModel dynamic_model(const Config& config) {
  const DynamicModel m = DynamicModel::TimeInvariant(
      config.integer("horizon"), config.matrix("a_x"), config.matrix("a_theta"),
      config.matrix("c_yx"), config.matrix("c_ytheta"),
      config.covariance("v_wx"), config.covariance("v_wtheta"),
      config.covariance("v_wy"), config.covariance("initial_covariance"));
  return m;
}

Table run_fig2(double mu_min, double mu_max, Index steps) {
  if (steps < 2 || !(mu_max > mu_min)) {
    throw ConfigError("fig2: need steps >= 2 and mu_max > mu_min");
  }
  Table t;
  t.header = {"mu", "alpha1", "alpha2", "ratio", "alpha1_closed", "alpha2_closed"};
  for (Index k = 0; k < steps; ++k) {
    const double mu =
        mu_min + (mu_max - mu_min) * static_cast<double>(k) /
                     static_cast<double>(steps - 1);
    const JointGaussian prior = JointGaussian::WithoutSideChannel(
        Matrix::Ones(1, 1), Matrix::Constant(1, 1, mu),
        Matrix::Constant(1, 1, mu * mu + 1.0));
    const EquilibriumReport r = equilibrium_scalar(prior);
    const double a1 = r.policy.alpha1(0, 0);
    const double a2 = r.policy.alpha2(0, 0);
    const Vector c = closed_form_gains(mu);
    t.add({mu, a1, a2, a1 / a2, c(0), c(1)});
  }
  return t;
}

Table run_fig3(Index n_max, double sigma) {
  if (n_max < 1 || !(sigma > 0.0)) {
    throw ConfigError("fig3: need n_max >= 1 and sigma > 0");
  }
  Table t;
  t.header = {"N", "e1", "e2", "e3", "ratio_e2_e3"};
  for (const ErrorCurveRow& r : error_curves(n_max, sigma)) {
    t.add({as_int(r.n), r.e1, r.e2, r.e3, r.ratio_e2_e3});
  }
  return t;
}

Table run_static(const Config& config) {
  config.require_only(kPriorKeys);
  const JointGaussian prior = static_prior(config);
  const Index n_z = config.integer("n_z", 1);
  const EquilibriumReport r = prior.n_y() > 0 ? equilibrium(prior, n_z)
                                              : equilibrium_no_side_channel(prior, n_z);
  const Index n = samples(config);
  const std::uint64_t seed = config.seed();
  const MonteCarloEstimate err =
      monte_carlo_receiver_error(prior, r.policy, r.receiver_gain.gain, n, seed);
  const MonteCarloEstimate cost =
      monte_carlo_sensor_cost(prior, r.policy, r.receiver_gain.gain, n, seed);
  Table t;
  t.header = {"quantity", "value"};
  t.add({"receiver_error", r.receiver_error});
  t.add({"sensor_cost", r.sensor_cost});
  t.add({"side_channel_error", side_channel_error(prior)});
  t.add({"mc_receiver_error", err.mean});
  t.add({"mc_receiver_error_se", err.standard_error});
  t.add({"mc_sensor_cost", cost.mean});
  t.add({"mc_sensor_cost_se", cost.standard_error});
  t.add({"eigen_tie", std::int64_t{r.eigen_tie ? 1 : 0}});
  add_matrix(t, "alpha1", r.policy.alpha1);
  add_matrix(t, "alpha2", r.policy.alpha2);
  add_matrix(t, "alpha3", r.policy.alpha3);
  add_matrix(t, "v_vv", r.policy.v_vv.matrix());
  return t;
}

Table run_dynamic(const Config& config) {
  config.require_only(kDynamicKeys);
  const DynamicModel model = dynamic_model(config);
  const auto rows = simulate_trajectory(model, config.integer("n_z", 1),
                                        config.seed(), samples(config));
  Table t;
  t.header = {"k", "trace_p_x", "empirical", "empirical_se", "c_zx_norm",
              "c_ztheta_norm"};
  for (const TrajectoryRow& r : rows) {
    t.add({as_int(r.k), r.trace_p_x, r.empirical.mean, r.empirical.standard_error,
           r.c_zx_norm, r.c_ztheta_norm});
  }
  return t;
}

Table run_multisync(const Config& config) {
  config.require_only(kPopulationKeys);
  const auto [lo, hi] = n_range(config);
  const Index n_samples = samples(config);
  Table t;
  t.header = {"n", "receiver_error", "formula_error", "sensor_cost", "a_norm",
              "b_norm", "eigen_tie", "mc_error", "mc_se"};
  for (Index n = lo; n <= hi; ++n) {
    const PopulationConfig c = population(config, n);
    const SymmetricEquilibrium eq = symmetric_equilibrium(c);
    const MonteCarloEstimate mc =
        monte_carlo_average_error(c, symmetric_profile(eq.policy, n),
                                  eq.receiver_gain.gain, n_samples, config.seed());
    t.add({as_int(n), eq.receiver_error, equilibrium_error_formula(c),
           eq.sensor_cost, eq.policy.a.norm(), eq.policy.b.norm(),
           std::int64_t{eq.eigen_tie ? 1 : 0}, mc.mean, mc.standard_error});
  }
  return t;
}

Table run_herding(const Config& config) {
  config.require_only(kPopulationKeys);
  const auto [lo, hi] = n_range(config);
  const Index n_samples = samples(config);
  Table t;
  t.header = {"n", "receiver_error", "varsigma", "breakaway_gain",
              "decomposition_residual", "mc_error", "mc_se"};
  for (Index n = lo; n <= hi; ++n) {
    const PopulationConfig c = population(config, n);
    const HerdingReport h = herding_equilibrium(c);
    const MonteCarloEstimate mc =
        monte_carlo_average_error(c, symmetric_profile(h.policy, n),
                                  h.receiver_gain.gain, n_samples, config.seed());
    t.add({as_int(n), h.receiver_error,
           h.varsigma.value_or(std::numeric_limits<double>::quiet_NaN()),
           breakaway_gain(c), cost_decomposition_check(c, h.policy).residual(),
           mc.mean, mc.standard_error});
  }
  return t;
}

Table run_async(const Config& config) {
  config.require_only({"v_xx", "v_xtheta", "v_thetatheta", "u_thetatheta",
                       "n", "n_z", "compare"});
  const Index n = config.integer("n", 5);
  if (n < 1) throw ConfigError("async: n must be >= 1");
  const PopulationConfig c = population(config, n);
  Table t;
  if (config.boolean("compare", false)) {
    t.header = {"n", "async_error", "sync_error"};
    for (const AsyncSyncRow& r : async_vs_sync_compare(c, n)) {
      t.add({as_int(r.n), r.async_error, r.sync_error});
    }
    return t;
  }
  const SequentialResult res = sequential_equilibrium(c, config.integer("n_z", 1));
  t.header = {"step", "error_after", "alpha1_norm", "alpha2_norm", "sensor_cost"};
  for (const SequentialStep& s : res.steps) {
    t.add({as_int(s.i), s.error_after, s.policy.alpha1.norm(),
           s.policy.alpha2.norm(), s.sensor_cost});
  }
  return t;
}

RunResult run(const Config& config) {
  const std::string id = config.experiment();
  RunResult out;
  if (id == "fig2") {
    config.require_only({"mu_min", "mu_max", "steps"});
    out.table = run_fig2(config.number("mu_min", -2.0), config.number("mu_max", 2.0),
                         config.integer("steps", 101));
  } else if (id == "fig3") {
    config.require_only({"n_max", "sigma"});
    out.table = run_fig3(config.integer("n_max", 100), config.number("sigma", 0.3820));
  } else if (id == "static") {
    out.table = run_static(config);
  } else if (id == "dynamic") {
    out.table = run_dynamic(config);
  } else if (id == "multisync") {
    out.table = run_multisync(config);
  } else if (id == "herding") {
    out.table = run_herding(config);
  } else if (id == "async") {
    out.table = run_async(config);
  } else if (id == "certify") {
    out = run_certify(config);
  } else {
    throw ConfigError("unknown experiment '" + id + "'");
  }
  return out;
}

}  // namespace stratest::cli
