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

#ifndef STRATEST_TESTS_ORACLES_HPP_
#define STRATEST_TESTS_ORACLES_HPP_

// Independent reference computations used only by tests. Nothing here calls
// the eigen-based solvers under test: trust-region optima come from
// projected gradient descent, population quantities from direct dense
// covariance algebra, and published curves from their closed forms.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix random_spd(std::mt19937_64& gen, Index n, double floor = 0.2) {
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = normal(gen);
  }
  Matrix s = a * a.transpose() / static_cast<double>(n);
  s += floor * Matrix::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = normal(gen);
  }
  return a;
}

// Smallest root of l^2 - (a + c) l + (a c - b^2) for [[a, b], [b, c]] and
// its unit eigenvector with nonnegative first nonzero component.
struct Eig2 {
  double value;
  double v0;
  double v1;
};

inline Eig2 smallest_eig_2x2(double a, double b, double c) {
  const double tr = a + c;
  const double det = a * c - b * b;
  const double l = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
  double v0 = b;
  double v1 = l - a;
  if (std::abs(v0) + std::abs(v1) < 1e-300) {
    v0 = l - c;
    v1 = b;
  }
  const double n = std::hypot(v0, v1);
  v0 /= n;
  v1 /= n;
  if (v0 < 0.0 || (v0 == 0.0 && v1 < 0.0)) {
    v0 = -v0;
    v1 = -v1;
  }
  return {l, v0, v1};
}

// min tr(u' M u) subject to u' J u <= I over 2n x n_z matrices u, with
// J = xi_prime^-1 and M = [[-I, -I], [-I, 0]]. J is whitened by its
// Cholesky factor and the ball problem is solved by projected gradient
// descent (projection clips singular values at 1) from random starts.
inline double projected_gradient_trust_region(const Matrix& xi_prime,
                                              Index n_z, int restarts,
                                              std::uint64_t seed) {
  const Index n = xi_prime.rows();
  const Index nx = n / 2;
  Matrix m = Matrix::Zero(n, n);
  m.topLeftCorner(nx, nx) = -Matrix::Identity(nx, nx);
  m.topRightCorner(nx, nx) = -Matrix::Identity(nx, nx);
  m.bottomLeftCorner(nx, nx) = -Matrix::Identity(nx, nx);
  const Matrix j = xi_prime.inverse();
  const Matrix l = Eigen::LLT<Matrix>(0.5 * (j + j.transpose())).matrixL();
  const Matrix l_inv = l.inverse();
  Matrix e = l_inv * m * l_inv.transpose();
  e = 0.5 * (e + e.transpose());
  const double lip = 2.0 * e.norm();
  std::mt19937_64 gen(seed);
  double best = 0.0;  // eta = 0 is feasible
  for (int r = 0; r < restarts; ++r) {
    Matrix eta = random_matrix(gen, n, n_z);
    for (int it = 0; it < 20000; ++it) {
      Matrix next = eta - (2.0 / lip) * (e * eta);
      Eigen::JacobiSVD<Matrix> svd(next,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
      Vector s = svd.singularValues().cwiseMin(1.0);
      next = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
      const double step = (next - eta).norm();
      eta = next;
      if (step < 1e-13) break;
    }
    best = std::min(best, (eta.transpose() * e * eta).trace());
  }
  return best;
}

// Closed-form single-sensor gains with V_xx = 1, theta = mu x + n,
// Var(n) = 1, no side channel.
inline Vector example1_alpha(double mu) {
  const double s = std::sqrt((2.0 * mu + 1.0) * (2.0 * mu + 1.0) + 4.0);
  const double norm = std::sqrt((2.0 * mu + s + 1.0) * (2.0 * mu + s + 1.0) + 4.0);
  Vector a(2);
  a << (s + 1.0) / norm, 2.0 / norm;
  return a;
}

inline double example1_ratio(double mu) {
  return (std::sqrt((2.0 * mu + 1.0) * (2.0 * mu + 1.0) + 4.0) + 1.0) / 2.0;
}

// Published error curves for unit scalar variances.
inline double e1_printed(double n) {
  return 0.2763 * n / (0.7236 + 0.2763 * n);
}

inline double e2_printed(double n) {
  return 1.0 - 2.0 / (n + 4.0 - std::sqrt(n * (n + 4.0)));
}

inline double e3_printed(double n, double sigma) { return sigma / (sigma + n); }

inline double varsigma_printed(double n, double eta_x, double eta_theta) {
  const double a = n * eta_theta * eta_x;
  return (a * eta_x * eta_x +
          a * eta_x * std::sqrt(eta_x * eta_x + 4.0 / a) + 4.0) /
         (2.0 * a * eta_x * eta_x + 8.0);
}

// Population of N sensors observing x and private theta_i, each sending
// y_i = a_i' x + b_i' theta_i + v_i. State order (x, theta_1..theta_N).
struct Population {
  Matrix v_xx;
  Matrix v_xtheta;
  Matrix v_thetatheta;
  Matrix u_thetatheta;
  Index n = 1;

  Index nx() const { return v_xx.rows(); }

  Matrix state_cov() const {
    const Index d = nx();
    Matrix s((n + 1) * d, (n + 1) * d);
    s.topLeftCorner(d, d) = v_xx;
    for (Index i = 0; i < n; ++i) {
      s.block(0, (i + 1) * d, d, d) = v_xtheta;
      s.block((i + 1) * d, 0, d, d) = v_xtheta.transpose();
      for (Index j = 0; j < n; ++j) {
        s.block((i + 1) * d, (j + 1) * d, d, d) =
            (i == j) ? v_thetatheta : u_thetatheta;
      }
    }
    return s;
  }
};

struct Policies {
  std::vector<Vector> a;
  std::vector<Vector> b;
  std::vector<double> noise;
};

inline Matrix loadings(const Population& p, const Policies& pol) {
  const Index d = p.nx();
  Matrix h = Matrix::Zero(p.n, (p.n + 1) * d);
  for (Index i = 0; i < p.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    h.block(i, 0, 1, d) = pol.a[k].transpose();
    h.block(i, (i + 1) * d, 1, d) = pol.b[k].transpose();
  }
  return h;
}

// Gain on readout rows `h` (with noise `r`) and the resulting errors for
// x and for x + theta_i, computed with a plain LDLT solve.
struct Lms {
  Matrix gain;
  double error_x;
};

inline Matrix x_target(const Population& p) {
  Matrix t = Matrix::Zero(p.nx(), (p.n + 1) * p.nx());
  t.leftCols(p.nx()).setIdentity();
  return t;
}

inline double squared_error(const Matrix& s, const Matrix& t, const Matrix& h,
                            const Matrix& r, const Matrix& k) {
  return (t * s * t.transpose()).trace() -
         2.0 * (k * h * s * t.transpose()).trace() +
         (k * (h * s * h.transpose() + r) * k.transpose()).trace();
}

inline Lms lms(const Matrix& s, const Matrix& t, const Matrix& h,
               const Matrix& r) {
  const Matrix vmm = h * s * h.transpose() + r;
  const Matrix vtm = t * s * h.transpose();
  Lms out;
  out.gain = vmm.ldlt().solve(vtm.transpose()).transpose();
  out.error_x = squared_error(s, t, h, r, out.gain);
  return out;
}

// Receiver uses every y_i.
inline Lms full_vector_lms(const Population& p, const Policies& pol) {
  const Matrix h = loadings(p, pol);
  Matrix r = Matrix::Zero(p.n, p.n);
  for (Index i = 0; i < p.n; ++i) r(i, i) = pol.noise[static_cast<std::size_t>(i)];
  return lms(p.state_cov(), x_target(p), h, r);
}

// Receiver uses only the average of the y_i.
inline Lms average_lms(const Population& p, const Policies& pol) {
  const Matrix h = loadings(p, pol);
  const Matrix avg = Matrix::Constant(1, p.n, 1.0 / static_cast<double>(p.n));
  Matrix r = Matrix::Zero(p.n, p.n);
  for (Index i = 0; i < p.n; ++i) r(i, i) = pol.noise[static_cast<std::size_t>(i)];
  return lms(p.state_cov(), x_target(p), avg * h, avg * r * avg.transpose());
}

// E ||(x + theta_i) - x_hat||^2 with x_hat the full-vector LMS estimate.
inline double sensor_cost(const Population& p, const Policies& pol, Index i) {
  const Matrix h = loadings(p, pol);
  Matrix r = Matrix::Zero(p.n, p.n);
  for (Index k = 0; k < p.n; ++k) r(k, k) = pol.noise[static_cast<std::size_t>(k)];
  const Matrix s = p.state_cov();
  const Lms est = lms(s, x_target(p), h, r);
  Matrix t = x_target(p);
  t.block(0, (i + 1) * p.nx(), p.nx(), p.nx()).setIdentity();
  return squared_error(s, t, h, r, est.gain);
}

// E ||(x + theta_bar) - x_hat||^2, theta_bar the average type.
inline double average_type_cost(const Population& p, const Policies& pol) {
  const Matrix h = loadings(p, pol);
  Matrix r = Matrix::Zero(p.n, p.n);
  for (Index k = 0; k < p.n; ++k) r(k, k) = pol.noise[static_cast<std::size_t>(k)];
  const Matrix s = p.state_cov();
  const Lms est = lms(s, x_target(p), h, r);
  Matrix t = x_target(p);
  for (Index k = 0; k < p.n; ++k) {
    t.block(0, (k + 1) * p.nx(), p.nx(), p.nx()) =
        Matrix::Identity(p.nx(), p.nx()) / static_cast<double>(p.n);
  }
  return squared_error(s, t, h, r, est.gain);
}

}  // namespace oracle

#endif  // STRATEST_TESTS_ORACLES_HPP_
