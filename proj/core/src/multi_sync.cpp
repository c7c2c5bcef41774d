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

#include "stratest/multi_sync.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

constexpr double kRegimeTolerance = 1e-14;

// Moments of ybar needed by the receiver and by each sensor.
struct AverageMoments {
  double var = 0.0;   // Var(ybar)
  Vector cov_x;       // Cov(x, ybar)
  Vector sum_b;       // sum_j b_j
};

void check_profile(const PopulationConfig& c,
                   std::span<const SensorPolicy> profile) {
  if (static_cast<Index>(profile.size()) != c.n) {
    throw InvalidDimensions("profile must hold one policy per sensor");
  }
  for (const SensorPolicy& p : profile) {
    if (p.a.size() != c.n_x() || p.b.size() != c.n_x()) {
      throw InvalidDimensions("sensor policy has wrong dimension");
    }
    if (p.v_vv < 0.0) throw InvalidMatrix("sensor noise variance < 0");
  }
}

AverageMoments average_moments(const PopulationConfig& c,
                               std::span<const SensorPolicy> profile) {
  check_profile(c, profile);
  const double n = static_cast<double>(c.n);
  const Matrix& vxx = c.v_xx.matrix();
  const Matrix& vtt = c.v_thetatheta.matrix();
  const Matrix& u = c.u_thetatheta.matrix();
  Vector abar = Vector::Zero(c.n_x());
  AverageMoments m;
  m.sum_b = Vector::Zero(c.n_x());
  double own = 0.0;  // sum_j b_j' (V_tt - U) b_j + v_j
  for (const SensorPolicy& p : profile) {
    abar += p.a;
    m.sum_b += p.b;
    own += p.b.dot((vtt - u) * p.b) + p.v_vv;
  }
  abar /= n;
  m.var = abar.dot(vxx * abar) + 2.0 / n * abar.dot(c.v_xtheta * m.sum_b) +
          (own + m.sum_b.dot(u * m.sum_b)) / (n * n);
  m.cov_x = vxx * abar + c.v_xtheta * m.sum_b / n;
  return m;
}

Vector abar_of(std::span<const SensorPolicy> profile) {
  Vector s = Vector::Zero(profile.front().a.size());
  for (const SensorPolicy& p : profile) s += p.a;
  return s / static_cast<double>(profile.size());
}

// Cov(theta_i, ybar).
Vector cov_theta(const PopulationConfig& c,
                 std::span<const SensorPolicy> profile, Index i,
                 const AverageMoments& m) {
  const double n = static_cast<double>(c.n);
  const Vector& b_i = profile[static_cast<std::size_t>(i)].b;
  const Matrix& u = c.u_thetatheta.matrix();
  return c.v_xtheta.transpose() * abar_of(profile) +
         ((c.v_thetatheta.matrix() - u) * b_i + u * m.sum_b) / n;
}

double cost_from_moments(const PopulationConfig& c,
                         std::span<const SensorPolicy> profile, Index i,
                         const AverageMoments& m) {
  if (!(m.var > 0.0)) {
    throw SingularConditioning("average message has zero variance");
  }
  const Vector k = m.cov_x / m.var;
  const double v_tt = c.v_xx.trace() + 2.0 * c.v_xtheta.trace() +
                      c.v_thetatheta.trace();
  return v_tt - 2.0 * k.dot(m.cov_x + cov_theta(c, profile, i, m)) +
         m.var * k.squaredNorm();
}

Vector random_unit(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(gen);
  return v.normalized();
}

// Smallest eigenpair of [[0, -Vtt^1/2 Vxx^1/2], [-Vxx^1/2 Vtt^1/2, -Vxx]],
// (theta part; x part).
SmallestEigenspace coupling_eigpair(const SymMatrix& v_xx,
                                    const SymMatrix& v_tt) {
  const Index d = v_xx.dim();
  const Matrix sx = matrix_sqrt(v_xx).matrix();
  const Matrix st = matrix_sqrt(v_tt).matrix();
  Matrix f = Matrix::Zero(2 * d, 2 * d);
  f.topRightCorner(d, d) = -st * sx;
  f.bottomLeftCorner(d, d) = -sx * st;
  f.bottomRightCorner(d, d) = -v_xx.matrix();
  return smallest_eigenpairs(SymMatrix::Symmetrized(f), 1);
}

}  // namespace

PopulationConfig PopulationConfig::Independent(Index n, const SymMatrix& v_xx,
                                               const SymMatrix& v_thetatheta) {
  PopulationConfig c;
  c.n = n;
  c.v_xx = v_xx;
  c.v_xtheta = Matrix::Zero(v_xx.dim(), v_xx.dim());
  c.v_thetatheta = v_thetatheta;
  c.u_thetatheta = SymMatrix::Zero(v_xx.dim());
  c.validate();
  return c;
}

PopulationConfig PopulationConfig::with_n(Index n_new) const {
  PopulationConfig c = *this;
  c.n = n_new;
  return c;
}

SymMatrix PopulationConfig::state_covariance() const {
  const Index d = n_x();
  Matrix s((n + 1) * d, (n + 1) * d);
  s.topLeftCorner(d, d) = v_xx.matrix();
  for (Index i = 0; i < n; ++i) {
    s.block(0, (i + 1) * d, d, d) = v_xtheta;
    s.block((i + 1) * d, 0, d, d) = v_xtheta.transpose();
    for (Index j = 0; j < n; ++j) {
      s.block((i + 1) * d, (j + 1) * d, d, d) =
          i == j ? v_thetatheta.matrix() : u_thetatheta.matrix();
    }
  }
  return SymMatrix::Symmetrized(s);
}

void PopulationConfig::validate() const {
  const Index d = n_x();
  if (n < 1) throw InvalidDimensions("population: N must be >= 1");
  if (d < 1 || v_thetatheta.dim() != d || u_thetatheta.dim() != d ||
      v_xtheta.rows() != d || v_xtheta.cols() != d) {
    throw InvalidDimensions("population: block sizes differ");
  }
  // Exchangeable structure: PD iff the (x, mean type) block and
  // V_tt - U are PD, so the check never needs the (N+1) n_x matrix.
  if (!is_positive_definite(v_thetatheta - u_thetatheta)) {
    throw InvalidCovariance("population: V_thetatheta - U is not PD");
  }
  const double nn = static_cast<double>(n);
  Matrix head(2 * d, 2 * d);
  head << v_xx.matrix(), v_xtheta, v_xtheta.transpose(),
      (v_thetatheta.matrix() + (nn - 1.0) * u_thetatheta.matrix()) / nn;
  if (!is_positive_definite(SymMatrix::Symmetrized(head))) {
    throw InvalidCovariance("population: covariance is not PD");
  }
}

void require_independent_types(const PopulationConfig& config) {
  config.validate();
  if (config.v_xtheta.cwiseAbs().maxCoeff() > kRegimeTolerance ||
      config.u_thetatheta.matrix().cwiseAbs().maxCoeff() > kRegimeTolerance) {
    throw UnsupportedRegime(
        "symmetric equilibrium requires V_xtheta = 0 and U_thetatheta = 0");
  }
}

Profile symmetric_profile(const SensorPolicy& policy, Index n) {
  return Profile(static_cast<std::size_t>(n), policy);
}

LinearReadout population_readout(const PopulationConfig& config,
                                 std::span<const SensorPolicy> profile) {
  check_profile(config, profile);
  const Index d = config.n_x();
  LinearReadout r;
  r.loadings = Matrix::Zero(config.n, (config.n + 1) * d);
  Vector noise(config.n);
  for (Index i = 0; i < config.n; ++i) {
    const SensorPolicy& p = profile[static_cast<std::size_t>(i)];
    r.loadings.block(i, 0, 1, d) = p.a.transpose();
    r.loadings.block(i, (i + 1) * d, 1, d) = p.b.transpose();
    noise(i) = p.v_vv;
  }
  r.noise = SymMatrix::Diagonal(noise);
  return r;
}

LinearReadout average_readout(const PopulationConfig& config,
                              std::span<const SensorPolicy> profile) {
  const LinearReadout full = population_readout(config, profile);
  const double n = static_cast<double>(config.n);
  LinearReadout r;
  r.loadings = full.loadings.colwise().sum() / n;
  r.noise = SymMatrix::Diagonal(
      Vector::Constant(1, full.noise.trace() / (n * n)));
  return r;
}

double average_variance(const PopulationConfig& config,
                        std::span<const SensorPolicy> profile) {
  return average_moments(config, profile).var;
}

LmsGain average_receiver(const PopulationConfig& config,
                         std::span<const SensorPolicy> profile) {
  const AverageMoments m = average_moments(config, profile);
  const double scale = std::max(1.0, config.v_xx.trace());
  if (!(m.var > kSingularTolerance * scale)) {
    throw SingularConditioning("average message has zero variance");
  }
  LmsGain g;
  g.gain = m.cov_x / m.var;
  g.error_covariance = SymMatrix::Symmetrized(
      config.v_xx.matrix() - m.cov_x * m.cov_x.transpose() / m.var);
  return g;
}

double sensor_cost(const PopulationConfig& config,
                   std::span<const SensorPolicy> profile, Index i) {
  if (i < 0 || i >= config.n) throw InvalidDimensions("sensor index");
  return cost_from_moments(config, profile, i, average_moments(config, profile));
}

SymmetricEquilibrium symmetric_equilibrium(const PopulationConfig& config) {
  require_independent_types(config);
  const Index d = config.n_x();
  const SmallestEigenspace e =
      coupling_eigpair(config.v_xx, config.v_thetatheta);
  const Vector xi1 = e.vectors.col(0).head(d);
  const Vector xi2 = e.vectors.col(0).tail(d);
  const double n = static_cast<double>(config.n);
  const double denom = 1.0 + (n - 1.0) * xi1.squaredNorm();
  SymmetricEquilibrium out;
  out.xi = e.vectors.col(0);
  out.eigenvalue = e.values(0);
  out.eigen_tie = e.tie;
  out.policy.b = n * inv_sqrt(config.v_thetatheta).matrix() * xi1 /
                 std::sqrt(denom);
  out.policy.a = inv_sqrt(config.v_xx).matrix() * xi2 / std::sqrt(denom);
  out.policy.v_vv = 0.0;
  const Profile profile = symmetric_profile(out.policy, config.n);
  out.receiver_gain = average_receiver(config, profile);
  out.receiver_error = out.receiver_gain.error();
  out.sensor_cost = sensor_cost(config, profile, 0);
  return out;
}

double equilibrium_error_formula(const PopulationConfig& config) {
  require_independent_types(config);
  const Index d = config.n_x();
  const Vector xi = coupling_eigpair(config.v_xx, config.v_thetatheta).vectors.col(0);
  const Vector xi1 = xi.head(d);
  const Vector sx_xi2 = matrix_sqrt(config.v_xx).matrix() * xi.tail(d);
  const double n = static_cast<double>(config.n);
  return config.v_xx.trace() -
         sx_xi2.squaredNorm() / (1.0 + (n - 1.0) * xi1.squaredNorm());
}

std::vector<double> error_vs_n(const PopulationConfig& config,
                               std::span<const Index> ns) {
  std::vector<double> out;
  out.reserve(ns.size());
  for (Index n : ns) {
    out.push_back(symmetric_equilibrium(config.with_n(n)).receiver_error);
  }
  return out;
}

double remaining_budget(const PopulationConfig& config,
                        std::span<const SensorPolicy> profile, Index i) {
  check_profile(config, profile);
  const double n = static_cast<double>(config.n);
  double used = 0.0;
  for (Index j = 0; j < config.n; ++j) {
    if (j == i) continue;
    const SensorPolicy& p = profile[static_cast<std::size_t>(j)];
    used += p.b.dot(config.v_thetatheta.matrix() * p.b) + p.v_vv;
  }
  return 1.0 - used / (n * n);
}

SensorPolicy best_response_map(const PopulationConfig& config,
                               std::span<const SensorPolicy> profile,
                               Index i) {
  require_independent_types(config);
  if (i < 0 || i >= config.n) throw InvalidDimensions("sensor index");
  const Index d = config.n_x();
  const double rho = remaining_budget(config, profile, i);
  if (rho < -kSingularTolerance) {
    throw InfeasibleOthers("others exceed the normalized variance budget (" +
                           std::to_string(rho) + ")");
  }
  SensorPolicy out{Vector::Zero(d), Vector::Zero(d), 0.0};
  if (rho <= kSingularTolerance) return out;
  const Vector xi = coupling_eigpair(config.v_xx, config.v_thetatheta).vectors.col(0);
  const double n = static_cast<double>(config.n);
  Vector others = Vector::Zero(d);
  for (Index j = 0; j < config.n; ++j) {
    if (j != i) others += profile[static_cast<std::size_t>(j)].a;
  }
  Vector b = std::sqrt(rho) * n * inv_sqrt(config.v_thetatheta).matrix() *
             xi.head(d);
  Vector abar =
      std::sqrt(rho) * inv_sqrt(config.v_xx).matrix() * xi.tail(d);
  if (abar.dot(others) < 0.0) {
    b = -b;
    abar = -abar;
  }
  out.a = n * abar - others;
  out.b = b;
  Profile trial(profile.begin(), profile.end());
  trial[static_cast<std::size_t>(i)] = SensorPolicy{out.a, out.b, 0.0};
  out.v_vv = std::max(0.0, n * n * (1.0 - average_variance(config, trial)));
  return out;
}

AverageSufficesResult average_suffices_check(
    const PopulationConfig& config, std::span<const SensorPolicy> profile) {
  check_profile(config, profile);
  const SymMatrix s = config.state_covariance();
  Matrix target = Matrix::Zero(config.n_x(), s.dim());
  target.leftCols(config.n_x()).setIdentity();
  const LmsGain full =
      lms_for_target(s, target, population_readout(config, profile));
  const LmsGain avg = lms_for_target(s, target, average_readout(config, profile));
  AverageSufficesResult r;
  r.error_full = full.error();
  r.error_average = avg.error();
  for (const SensorPolicy& p : profile) {
    const SensorPolicy& q = profile.front();
    if ((p.a - q.a).norm() > 0.0 || (p.b - q.b).norm() > 0.0 ||
        p.v_vv != q.v_vv) {
      r.applicable = false;
    }
  }
  const double n = static_cast<double>(config.n);
  r.gain_residual =
      (full.gain - avg.gain * Matrix::Constant(1, config.n, 1.0 / n)).norm();
  return r;
}

bool normalize_deviation(const PopulationConfig& config, Profile& profile,
                         Index i) {
  auto& p = profile[static_cast<std::size_t>(i)];
  const double n = static_cast<double>(config.n);
  p.v_vv = 0.0;
  const double base = average_variance(config, profile);
  if (base <= 1.0) {
    p.v_vv = n * n * (1.0 - base);
    return true;
  }
  const SensorPolicy keep = p;
  auto var_at = [&](double t) {
    p.a = t * keep.a;
    p.b = t * keep.b;
    return average_variance(config, profile);
  };
  const double c0 = var_at(0.0);
  const double vp = var_at(1.0);
  const double vm = var_at(-1.0);
  const double c2 = 0.5 * (vp + vm) - c0;
  const double c1 = 0.5 * (vp - vm);
  const double c = c0 - 1.0;
  double t = 0.0;
  if (std::abs(c2) < 1e-300) {
    if (std::abs(c1) < 1e-300) return false;
    t = -c / c1;
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c;
    if (disc < 0.0) {
      p = keep;
      return false;
    }
    const double r1 = (-c1 + std::sqrt(disc)) / (2.0 * c2);
    const double r2 = (-c1 - std::sqrt(disc)) / (2.0 * c2);
    t = std::abs(r1 - 1.0) <= std::abs(r2 - 1.0) ? r1 : r2;
  }
  var_at(t);
  const double v = average_variance(config, profile);
  p.v_vv = std::max(0.0, n * n * (1.0 - v));
  return true;
}

namespace {

double policy_distance(const SensorPolicy& p, const SensorPolicy& q) {
  return std::max({(p.a - q.a).norm(), (p.b - q.b).norm(),
                   std::abs(p.v_vv - q.v_vv)});
}

Vector flatten(const SensorPolicy& p) {
  Vector v(p.a.size() + p.b.size() + 1);
  v << p.a, p.b, p.v_vv;
  return v;
}

}  // namespace

FixedPointCertificate profile_certificate(const PopulationConfig& config,
                                          const SensorPolicy& policy,
                                          Index trials, std::uint64_t seed,
                                          double tolerance) {
  FixedPointCertificate cert;
  cert.fixed_point.suite = "multisync.fixed_point";
  cert.fixed_point.threshold = 1e-8;
  cert.deviations.suite = "multisync.deviations";
  cert.deviations.threshold = tolerance;
  cert.forced_zero.suite = "multisync.forced_zero_a";
  cert.forced_zero.threshold = -1e-12;

  const Profile base = symmetric_profile(policy, config.n);
  for (Index i : {Index{0}, config.n - 1}) {
    const SensorPolicy br = best_response_map(config, base, i);
    cert.fixed_point.record(policy_distance(br, policy), flatten(br));
  }

  const Index d = config.n_x();
  CounterRng rng(seed, 0);
  std::mt19937_64 gen(rng());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index t = 0; t < trials; ++t) {
    const Index i = t % config.n;
    const double base_cost = sensor_cost(config, base, i);
    const double radius = (t % 2 == 0) ? 1e-2 : 1e-1;
    const Vector delta = radius * random_unit(gen, 2 * d);
    Profile dev = base;
    auto& p = dev[static_cast<std::size_t>(i)];
    p.a += delta.head(d);
    p.b += delta.tail(d);
    if (t % 3 == 2) {
      // Shrink own loadings; normalization then pads own noise.
      const double shrink = 1.0 - radius * (1.0 + unit(gen));
      p.a *= shrink;
      p.b *= shrink;
    }
    if (!normalize_deviation(config, dev, i)) continue;
    cert.deviations.record(base_cost - sensor_cost(config, dev, i), delta);
  }

  {
    Profile dev = base;
    dev[0].a.setZero();
    if (normalize_deviation(config, dev, 0)) {
      cert.forced_zero.record(
          sensor_cost(config, base, 0) - sensor_cost(config, dev, 0),
          flatten(dev[0]));
    } else {
      cert.forced_zero.passed = false;
      cert.forced_zero.detail = "a_i = 0 has no normalized completion";
    }
  }

  for (double scale : {0.5, 2.0, 4.0}) {
    Profile dev = base;
    dev[0].a *= scale;
    dev[0].b *= scale;
    cert.unnormalized_gain = std::max(
        cert.unnormalized_gain,
        sensor_cost(config, base, 0) - sensor_cost(config, dev, 0));
  }

  // Gauss-Seidel best responses from small perturbations.
  for (int start = 0; start < 3; ++start) {
    Profile prof = base;
    for (SensorPolicy& p : prof) {
      p.a += 1e-2 * random_unit(gen, d);
      p.b += 1e-2 * random_unit(gen, d);
    }
    Index sweeps = 0;
    try {
      for (; sweeps < 50; ++sweeps) {
        double moved = 0.0;
        for (Index i = 0; i < config.n; ++i) {
          const SensorPolicy next = best_response_map(config, prof, i);
          moved = std::max(moved,
                           policy_distance(next, prof[static_cast<std::size_t>(i)]));
          prof[static_cast<std::size_t>(i)] = next;
        }
        if (moved < 1e-12) break;
      }
    } catch (const InfeasibleOthers&) {
      sweeps = -1;
    }
    double dist = 0.0;
    for (const SensorPolicy& p : prof) {
      dist = std::max(dist, std::min((p.b - policy.b).norm(),
                                     (p.b + policy.b).norm()));
    }
    cert.iteration_distance = std::max(cert.iteration_distance, dist);
    cert.iteration_sweeps = std::max(cert.iteration_sweeps, sweeps);
  }

  cert.fixed_point.detail = "best response of the first and last sensor";
  cert.deviations.detail =
      "unilateral affine deviations, radii 1e-2 and 1e-1, normalized to "
      "Var(ybar) = 1";
  if (cert.forced_zero.detail.empty()) {
    cert.forced_zero.detail = "sensor 0 drops its x coefficient";
  }
  return cert;
}

FixedPointCertificate fixed_point_certificate(const PopulationConfig& config,
                                              Index trials, std::uint64_t seed,
                                              double tolerance) {
  return profile_certificate(config, symmetric_equilibrium(config).policy,
                             trials, seed, tolerance);
}

MonteCarloEstimate monte_carlo_average_error(
    const PopulationConfig& config, std::span<const SensorPolicy> profile,
    const Matrix& gain, Index samples, std::uint64_t seed) {
  check_profile(config, profile);
  const Index d = config.n_x();
  const bool independent =
      config.v_xtheta.cwiseAbs().maxCoeff() <= kRegimeTolerance &&
      config.u_thetatheta.matrix().cwiseAbs().maxCoeff() <= kRegimeTolerance;
  Matrix x;
  std::vector<Matrix> theta;
  if (independent) {
    // Stream 0 for the state, stream i + 1 for sensor i's type.
    x = GaussianSampler(config.v_xx).draw(samples, seed, 0);
    for (Index i = 0; i < config.n; ++i) {
      theta.push_back(GaussianSampler(config.v_thetatheta)
                          .draw(samples, seed, static_cast<std::uint64_t>(i + 1)));
    }
  } else {
    const Matrix s = GaussianSampler(config.state_covariance()).draw(samples, seed, 0);
    x = s.leftCols(d);
    for (Index i = 0; i < config.n; ++i) theta.push_back(s.middleCols((i + 1) * d, d));
  }
  Vector ybar = Vector::Zero(samples);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < config.n; ++i) {
    const SensorPolicy& p = profile[static_cast<std::size_t>(i)];
    ybar += x * p.a + theta[static_cast<std::size_t>(i)] * p.b;
    if (p.v_vv > 0.0) {
      CounterRng rng(seed, static_cast<std::uint64_t>(config.n + 1 + i));
      const double sd = std::sqrt(p.v_vv);
      for (Index k = 0; k < samples; ++k) ybar(k) += sd * normal(rng);
    }
  }
  ybar /= static_cast<double>(config.n);
  const Matrix err = x - ybar * gain.transpose();
  return summarize(err.rowwise().squaredNorm());
}

}  // namespace stratest
