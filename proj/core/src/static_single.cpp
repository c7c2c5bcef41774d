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

#include "stratest/static_single.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

// Clamp round-off negatives in an injected-noise covariance.
SymMatrix clamp_noise(const SymMatrix& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(v.matrix());
  Vector values = solver.eigenvalues();
  if (values.minCoeff() < -kNoiseClamp) {
    throw InfeasibleMessage("injected noise covariance has eigenvalue " +
                            std::to_string(values.minCoeff()));
  }
  if (values.minCoeff() >= 0.0) return v;
  values = values.cwiseMax(0.0);
  const Matrix& u = solver.eigenvectors();
  return SymMatrix::Symmetrized(u * values.asDiagonal() * u.transpose());
}

// Cov(s | y) for s = (x, theta, y), embedded in the full index set (the y
// rows and columns are zero).
Matrix covariance_given_y(const JointGaussian& prior) {
  const Matrix& s = prior.covariance().matrix();
  if (prior.n_y() == 0) return s;
  const Index ny = prior.n_y();
  const Matrix s_y = s.rightCols(ny);
  const Matrix v_yy = prior.v_yy();
  return s - s_y * v_yy.llt().solve(s_y.transpose());
}

Matrix random_direction(std::mt19937_64& gen, Index rows, Index cols,
                        double radius) {
  std::normal_distribution<double> normal;
  Matrix d(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) d(i, j) = normal(gen);
  }
  const double n = d.norm();
  return n > 0.0 ? Matrix(d * (radius / n)) : d;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace

Matrix AffineSensorPolicy::stacked() const {
  Matrix out(alpha1.rows() + alpha2.rows() + alpha3.rows(), n_z());
  out << alpha1, alpha2, alpha3;
  return out;
}

AffineSensorPolicy AffineSensorPolicy::FromStacked(const Matrix& alpha,
                                                   Index n_x, Index n_y,
                                                   const SymMatrix& v_vv) {
  if (alpha.rows() != 2 * n_x + n_y || v_vv.dim() != alpha.cols()) {
    throw InvalidDimensions("AffineSensorPolicy: stacked shape mismatch");
  }
  AffineSensorPolicy p;
  p.alpha1 = alpha.topRows(n_x);
  p.alpha2 = alpha.middleRows(n_x, n_x);
  p.alpha3 = alpha.bottomRows(n_y);
  p.v_vv = clamp_noise(v_vv);
  return p;
}

TrustRegionProblem build_wq(const JointGaussian& prior) {
  const Index nx = prior.n_x();
  const Index ny = prior.n_y();
  const Index n = prior.dim();
  TrustRegionProblem p;
  p.xi = Matrix::Zero(2 * nx, n);
  p.xi.leftCols(2 * nx).setIdentity();
  Matrix v_yy_inv = Matrix::Zero(ny, ny);
  if (ny > 0) {
    const LmsGain g = lms_gain(prior.state_covariance(),
                               prior.covariance().matrix().block(0, 2 * nx,
                                                                 2 * nx, ny),
                               prior.covariance().block(2 * nx, ny));
    p.xi.rightCols(ny) = -g.gain;
    p.xi_prime = g.error_covariance;
    v_yy_inv = pd_inverse(prior.covariance().block(2 * nx, ny)).matrix();
  } else {
    p.xi_prime = prior.state_covariance();
  }
  Matrix m(2 * nx, 2 * nx);
  const Matrix eye = Matrix::Identity(nx, nx);
  m << -eye, -eye, -eye, Matrix::Zero(nx, nx);
  p.w = SymMatrix::Symmetrized(p.xi.transpose() * m * p.xi);
  p.j = pd_inverse(p.xi_prime);
  Matrix q = pd_inverse(prior.covariance()).matrix();
  q.bottomRightCorner(ny, ny) -= v_yy_inv;
  p.q = SymMatrix::Symmetrized(q);
  return p;
}

UnitBallSolution solve_unit_ball(const SymMatrix& e, Index n_z) {
  if (n_z < 1 || n_z > e.dim()) {
    throw InvalidDimensions("message dimension must lie in [1, 2 n_x]");
  }
  const SmallestEigenspace space = smallest_eigenpairs(e, n_z);
  UnitBallSolution out;
  out.eta = space.vectors;
  out.values = space.values;
  out.tie = space.tie;
  for (Index j = 0; j < n_z; ++j) {
    if (space.values(j) >= 0.0) out.eta.col(j).setZero();
  }
  return out;
}

SymMatrix whitened_cost(const SymMatrix& xi_prime) {
  const Index nx = xi_prime.dim() / 2;
  const Matrix eye = Matrix::Identity(nx, nx);
  Matrix m(2 * nx, 2 * nx);
  m << -eye, -eye, -eye, Matrix::Zero(nx, nx);
  return SymMatrix::Symmetrized(m).congruence(matrix_sqrt(xi_prime).matrix());
}

Matrix solve_trust_region(const TrustRegionProblem& p, Index n_z) {
  const UnitBallSolution sol = solve_unit_ball(whitened_cost(p.xi_prime), n_z);
  return pseudo_inverse(p.xi) * matrix_sqrt(p.xi_prime).matrix() * sol.eta;
}

AffineSensorPolicy sensor_policy_from_covariances(const JointGaussian& prior,
                                                  const Matrix& v_xz,
                                                  const Matrix& v_thetaz,
                                                  const Matrix& v_yz) {
  const Index nz = v_xz.cols();
  if (v_xz.rows() != prior.n_x() || v_thetaz.rows() != prior.n_x() ||
      v_yz.rows() != prior.n_y() || v_thetaz.cols() != nz ||
      v_yz.cols() != nz) {
    throw InvalidDimensions("message covariance blocks have wrong shape");
  }
  Matrix xi(prior.dim(), nz);
  xi << v_xz, v_thetaz, v_yz;
  const TrustRegionProblem p = build_wq(prior);
  const Matrix alpha = prior.covariance().matrix().llt().solve(xi);
  const Matrix v_vv = Matrix::Identity(nz, nz) - xi.transpose() * p.q.matrix() * xi;
  return AffineSensorPolicy::FromStacked(alpha, prior.n_x(), prior.n_y(),
                                         SymMatrix::Symmetrized(v_vv));
}

AffineSensorPolicy scale_policy(const AffineSensorPolicy& policy,
                                double kappa) {
  AffineSensorPolicy out = policy;
  out.alpha1 *= kappa;
  out.alpha2 *= kappa;
  out.alpha3 *= kappa;
  out.v_vv = policy.v_vv * (kappa * kappa);
  return out;
}

LinearReadout message_readout(const JointGaussian& prior,
                              const AffineSensorPolicy& policy) {
  const Index nx = prior.n_x();
  const Index ny = prior.n_y();
  const Index nz = policy.n_z();
  if (policy.alpha1.rows() != nx || policy.alpha2.rows() != nx ||
      policy.alpha3.rows() != ny || policy.alpha2.cols() != nz ||
      policy.alpha3.cols() != nz || policy.v_vv.dim() != nz) {
    throw InvalidDimensions("policy does not match the prior");
  }
  LinearReadout r;
  r.loadings = Matrix::Zero(ny + nz, prior.dim());
  r.loadings.topRightCorner(ny, ny).setIdentity();
  r.loadings.bottomRows(nz) = policy.stacked().transpose();
  Matrix noise = Matrix::Zero(ny + nz, ny + nz);
  noise.bottomRightCorner(nz, nz) = policy.v_vv.matrix();
  r.noise = SymMatrix::Symmetrized(noise);
  return r;
}

namespace {

Matrix x_target(const JointGaussian& prior) {
  Matrix t = Matrix::Zero(prior.n_x(), prior.dim());
  t.leftCols(prior.n_x()).setIdentity();
  return t;
}

Matrix x_plus_theta_target(const JointGaussian& prior) {
  Matrix t = x_target(prior);
  t.middleCols(prior.n_x(), prior.n_x()).setIdentity();
  return t;
}

}  // namespace

LmsGain receiver_response(const JointGaussian& prior,
                          const AffineSensorPolicy& policy) {
  return lms_for_target(prior.covariance(), x_target(prior),
                        message_readout(prior, policy));
}

double receiver_error(const JointGaussian& prior,
                      const AffineSensorPolicy& policy, const Matrix& gain) {
  return expected_squared_error(prior.covariance(), x_target(prior),
                                message_readout(prior, policy), gain);
}

double sensor_cost(const JointGaussian& prior, const AffineSensorPolicy& policy,
                   const Matrix& gain) {
  return expected_squared_error(prior.covariance(), x_plus_theta_target(prior),
                                message_readout(prior, policy), gain);
}

double sensor_cost_constant(const JointGaussian& prior) {
  const Matrix t = x_plus_theta_target(prior);
  const double v_tt = prior.covariance().congruence(t).trace();
  if (prior.n_y() == 0) return v_tt;
  const Matrix v_yy_inv = pd_inverse(prior.covariance().block(2 * prior.n_x(),
                                                              prior.n_y()))
                              .matrix();
  const Matrix v_xy = prior.v_xy();
  const Matrix v_thetay = prior.v_thetay();
  return v_tt - (v_xy * v_yy_inv * v_xy.transpose()).trace() -
         2.0 * (v_thetay * v_yy_inv * v_xy.transpose()).trace();
}

double side_channel_error(const JointGaussian& prior) {
  if (prior.n_y() == 0) return prior.v_xx().trace();
  return lms_gain(prior.covariance().block(0, prior.n_x()), prior.v_xy(),
                  prior.covariance().block(2 * prior.n_x(), prior.n_y()))
      .error();
}

EquilibriumReport evaluate_policy(const JointGaussian& prior,
                                  const AffineSensorPolicy& policy) {
  EquilibriumReport r;
  r.policy = policy;
  r.receiver_gain = receiver_response(prior, policy);
  r.receiver_error = receiver_error(prior, policy, r.receiver_gain.gain);
  r.sensor_cost = sensor_cost(prior, policy, r.receiver_gain.gain);
  const Matrix xi = prior.covariance().matrix() * policy.stacked();
  r.v_xz = xi.topRows(prior.n_x());
  r.v_thetaz = xi.middleRows(prior.n_x(), prior.n_x());
  r.v_yz = xi.bottomRows(prior.n_y());
  return r;
}

EquilibriumReport equilibrium(const JointGaussian& prior, Index n_z) {
  if (n_z < 1 || n_z > 2 * prior.n_x()) {
    throw InvalidDimensions("message dimension must lie in [1, 2 n_x]");
  }
  const TrustRegionProblem p = build_wq(prior);
  const UnitBallSolution sol = solve_unit_ball(whitened_cost(p.xi_prime), n_z);
  const Matrix xi =
      pseudo_inverse(p.xi) * matrix_sqrt(p.xi_prime).matrix() * sol.eta;
  const Index nx = prior.n_x();
  EquilibriumReport r = evaluate_policy(
      prior, sensor_policy_from_covariances(prior, xi.topRows(nx),
                                            xi.middleRows(nx, nx),
                                            xi.bottomRows(prior.n_y())));
  r.eigenvalues = sol.values;
  r.eigen_tie = sol.tie;
  return r;
}

EquilibriumReport equilibrium_scalar(const JointGaussian& prior) {
  return equilibrium(prior, 1);
}

EquilibriumReport equilibrium_no_side_channel(const JointGaussian& prior,
                                              Index n_z) {
  if (n_z < 1 || n_z > 2 * prior.n_x()) {
    throw InvalidDimensions("message dimension must lie in [1, 2 n_x]");
  }
  const SymMatrix xi_prime =
      prior.n_y() == 0 ? prior.state_covariance() : build_wq(prior).xi_prime;
  const UnitBallSolution sol = solve_unit_ball(whitened_cost(xi_prime), n_z);
  const Matrix a12 = inv_sqrt(xi_prime).matrix() * sol.eta;
  Matrix alpha = Matrix::Zero(prior.dim(), n_z);
  alpha.topRows(2 * prior.n_x()) = a12;
  const SymMatrix v_vv =
      SymMatrix::Identity(n_z) - xi_prime.congruence(a12.transpose());
  EquilibriumReport r = evaluate_policy(
      prior,
      AffineSensorPolicy::FromStacked(alpha, prior.n_x(), prior.n_y(), v_vv));
  r.eigenvalues = sol.values;
  r.eigen_tie = sol.tie;
  return r;
}

BestResponseCertificate best_response_certificate(
    const JointGaussian& prior, const EquilibriumReport& report, Index trials,
    std::uint64_t seed, double tolerance) {
  BestResponseCertificate cert;
  cert.receiver.suite = "static.receiver";
  cert.receiver.threshold = tolerance;
  cert.sensor.suite = "static.sensor";
  cert.sensor.threshold = tolerance;

  const AffineSensorPolicy& policy = report.policy;
  const Matrix& gain = report.receiver_gain.gain;
  const double base_error = receiver_error(prior, policy, gain);
  const double base_cost = sensor_cost(prior, policy, gain);
  const Matrix g = covariance_given_y(prior);
  const Matrix alpha = policy.stacked();
  const Index nz = policy.n_z();

  CounterRng rng(seed, 0);
  std::mt19937_64 gen(rng());
  for (Index t = 0; t < trials; ++t) {
    const double radius = (t % 2 == 0) ? 1e-2 : 1e-1;
    const Matrix dk = random_direction(gen, gain.rows(), gain.cols(), radius);
    const double err = receiver_error(prior, policy, gain + dk);
    cert.receiver.record(base_error - err, flatten(dk));
  }

  for (Index t = 0; t < trials; ++t) {
    const double radius = (t % 2 == 0) ? 1e-2 : 1e-1;
    const Matrix delta = random_direction(gen, alpha.rows(), nz, radius);
    Matrix a = alpha + delta;
    SymMatrix v_vv = policy.v_vv;
    switch (t % 3) {
      case 0: {
        // Stay on the normalized surface Cov(z | y) = I.
        const SymMatrix s = SymMatrix::Symmetrized(a.transpose() * g * a);
        const double top = max_eigenvalue(s);
        if (top > 1.0) a /= std::sqrt(top);
        v_vv = SymMatrix::Symmetrized(Matrix::Identity(nz, nz) -
                                      a.transpose() * g * a);
        break;
      }
      case 1:
        break;
      default: {
        const Matrix extra = random_direction(gen, nz, 1, radius);
        v_vv = v_vv + SymMatrix::Diagonal(extra.col(0).cwiseAbs());
        break;
      }
    }
    AffineSensorPolicy dev;
    try {
      dev = AffineSensorPolicy::FromStacked(a, prior.n_x(), prior.n_y(),
                                            v_vv);
      const LmsGain response = receiver_response(prior, dev);
      cert.sensor.record(base_cost - sensor_cost(prior, dev, response.gain),
                         flatten(delta));
    } catch (const SingularConditioning&) {
      // A message with no variance beyond y carries no information; the
      // receiver's response is then the side-channel estimate and the
      // deviation is covered by the noise trials.
    }
  }
  cert.receiver.detail = "gain perturbations, radii 1e-2 and 1e-1";
  cert.sensor.detail =
      "normalized, raw and noise-injecting policy deviations, radii 1e-2 and "
      "1e-1";
  return cert;
}

bool nondegenerate_gains_check(const JointGaussian& prior) {
  const EquilibriumReport r = equilibrium_no_side_channel(prior, 1);
  return r.policy.alpha1.norm() > 1e-8 && r.policy.alpha2.norm() > 1e-8;
}

namespace {

// Per-draw squared error of target_rows * s - gain * m.
Vector simulate_errors(const JointGaussian& prior,
                       const AffineSensorPolicy& policy, const Matrix& gain,
                       const Matrix& target, Index samples,
                       std::uint64_t seed) {
  const Matrix s = sample_joint(prior, samples, seed, 0);
  const Matrix v = GaussianSampler(policy.v_vv, false).draw(samples, seed, 1);
  const Index ny = prior.n_y();
  Matrix m(samples, ny + policy.n_z());
  m.leftCols(ny) = s.rightCols(ny);
  m.rightCols(policy.n_z()) = s * policy.stacked() + v;
  const Matrix err = s * target.transpose() - m * gain.transpose();
  return err.rowwise().squaredNorm();
}

}  // namespace

MonteCarloEstimate monte_carlo_receiver_error(const JointGaussian& prior,
                                              const AffineSensorPolicy& policy,
                                              const Matrix& gain,
                                              Index samples,
                                              std::uint64_t seed) {
  return summarize(
      simulate_errors(prior, policy, gain, x_target(prior), samples, seed));
}

MonteCarloEstimate monte_carlo_sensor_cost(const JointGaussian& prior,
                                           const AffineSensorPolicy& policy,
                                           const Matrix& gain, Index samples,
                                           std::uint64_t seed) {
  return summarize(simulate_errors(prior, policy, gain,
                                   x_plus_theta_target(prior), samples, seed));
}

}  // namespace stratest
