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

#ifndef STRATEST_GAUSSIAN_CORE_HPP_
#define STRATEST_GAUSSIAN_CORE_HPP_

// Covariance algebra shared by every equilibrium solver: a validated
// symmetric matrix type, spectral primitives, linear MMSE (LMS) gains,
// Gaussian conditioning and seeded sampling.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stratest {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative asymmetry accepted by SymMatrix before symmetrizing.
inline constexpr double kSymmetryTolerance = 1e-12;
/// A covariance is positive definite when lambda_min > kPdTolerance * lambda_max.
inline constexpr double kPdTolerance = 1e-9;
/// Conditioning blocks with lambda_min <= kSingularTolerance * lambda_max are
/// treated as singular.
inline constexpr double kSingularTolerance = 1e-12;
/// Seed used by the tools and tests unless one is given explicitly.
inline constexpr std::uint64_t kDefaultSeed = 20260416;

/// Dense real symmetric matrix with finite entries.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Validates finiteness and symmetry (max |m - m^T| <= 1e-12 * max |m|),
  /// then stores the symmetric part. Throws InvalidMatrix.
  explicit SymMatrix(const Matrix& m);

  /// Symmetric part of a matrix that is symmetric in exact arithmetic
  /// (results of congruences, Schur complements). Only finiteness is checked.
  static SymMatrix Symmetrized(const Matrix& m);
  static SymMatrix Identity(Index n);
  static SymMatrix Zero(Index n);
  static SymMatrix Diagonal(const Vector& d);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

  /// Principal sub-block [start, start + size).
  SymMatrix block(Index start, Index size) const;
  /// Principal submatrix on an arbitrary ordered index set.
  SymMatrix select(std::span<const Index> indices) const;
  /// b * this * b^T.
  SymMatrix congruence(const Matrix& b) const;

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double s) const;

 private:
  Matrix m_;
};

struct EigPair {
  double value = 0.0;
  Vector vector;  // unit norm, first nonzero component positive
};

/// Algebraically smallest eigenvalue and its unit eigenvector.
EigPair smallest_eigpair(const SymMatrix& a);

struct SmallestEigenspace {
  Vector values;   // ascending
  Matrix vectors;  // unit columns, sign-canonicalized
  // True when the k-th and (k+1)-th eigenvalues coincide, i.e. the returned
  // columns are one choice out of a larger eigenspace.
  bool tie = false;
};

/// The k algebraically smallest eigenpairs.
SmallestEigenspace smallest_eigenpairs(const SymMatrix& a, Index k);

/// Flip the sign so the first component with |v_i| > 1e-12 is positive.
void canonicalize_sign(Eigen::Ref<Vector> v);

double min_eigenvalue(const SymMatrix& a);
double max_eigenvalue(const SymMatrix& a);
bool is_positive_definite(const SymMatrix& a, double rel_tol = kPdTolerance);
/// lambda_min(a) >= -abs_tol.
bool is_positive_semidefinite(const SymMatrix& a, double abs_tol = 1e-10);
/// lambda_min(upper - lower) >= -abs_tol, i.e. lower <= upper in Loewner order.
bool loewner_leq(const SymMatrix& lower, const SymMatrix& upper,
                 double abs_tol = 1e-9);

/// Symmetric PD square root. Throws NotPositiveDefinite.
SymMatrix matrix_sqrt(const SymMatrix& a);
/// Symmetric PD inverse square root. Throws NotPositiveDefinite.
SymMatrix inv_sqrt(const SymMatrix& a);
/// Inverse of a PD matrix. Throws NotPositiveDefinite.
SymMatrix pd_inverse(const SymMatrix& a);

/// Moore-Penrose pseudoinverse (SVD, cutoff eps * max(m, n) * sigma_max).
Matrix pseudo_inverse(const Matrix& a);

/// Zero-mean Gaussian prior of (x, theta, y), in that block order. theta
/// has the dimension of x; y may be empty (n_y = 0).
class JointGaussian {
 public:
  /// Throws InvalidDimensions or InvalidCovariance (not PD).
  JointGaussian(Index n_x, Index n_y, SymMatrix covariance);

  static JointGaussian FromBlocks(const Matrix& v_xx, const Matrix& v_xtheta,
                                  const Matrix& v_xy,
                                  const Matrix& v_thetatheta,
                                  const Matrix& v_thetay, const Matrix& v_yy);
  static JointGaussian WithoutSideChannel(const Matrix& v_xx,
                                          const Matrix& v_xtheta,
                                          const Matrix& v_thetatheta);

  Index n_x() const { return n_x_; }
  Index n_y() const { return n_y_; }
  Index dim() const { return 2 * n_x_ + n_y_; }
  const SymMatrix& covariance() const { return cov_; }

  Matrix v_xx() const;
  Matrix v_xtheta() const;
  Matrix v_xy() const;
  Matrix v_thetatheta() const;
  Matrix v_thetay() const;
  Matrix v_yy() const;
  /// Covariance of (x, theta).
  SymMatrix state_covariance() const;

  std::vector<Index> x_indices() const;
  std::vector<Index> theta_indices() const;
  std::vector<Index> y_indices() const;

 private:
  Index n_x_;
  Index n_y_;
  SymMatrix cov_;
};

/// Linear MMSE estimator t_hat = gain * m and its error covariance.
struct LmsGain {
  Matrix gain;
  SymMatrix error_covariance;

  double error() const { return error_covariance.trace(); }
};

/// gain = V_tm V_mm^-1, error = V_tt - V_tm V_mm^-1 V_mt. An empty m yields a
/// zero-width gain and error V_tt. Throws SingularConditioning.
LmsGain lms_gain(const SymMatrix& v_tt, const Matrix& v_tm,
                 const SymMatrix& v_mm);

/// Conditional covariance of the indices not in `conditioned_on` (in their
/// original order) given those that are. Throws SingularConditioning.
SymMatrix schur_conditional(const SymMatrix& joint,
                            std::span<const Index> conditioned_on);

std::vector<Index> index_range(Index begin, Index count);

/// m = loadings * s + v with v ~ N(0, noise) independent of s.
struct LinearReadout {
  Matrix loadings;
  SymMatrix noise;

  Index dim() const { return loadings.rows(); }
};

SymMatrix readout_covariance(const SymMatrix& state_cov,
                             const LinearReadout& readout);

/// E ||target * s - gain * m||^2 for an arbitrary (not necessarily optimal)
/// gain.
double expected_squared_error(const SymMatrix& state_cov, const Matrix& target,
                              const LinearReadout& readout,
                              const Matrix& gain);

/// LMS estimate of target * s from the readout.
LmsGain lms_for_target(const SymMatrix& state_cov, const Matrix& target,
                       const LinearReadout& readout);

/// Counter-based 64-bit generator: the n-th output is a SplitMix64 finalizer
/// applied to key + n * golden_gamma, where the key mixes (seed, stream).
/// Streams never share state, so per-stream draws are order independent.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();
  void discard(std::uint64_t n) { counter_ += n; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Draws N(0, cov). With require_pd the covariance must be PD (Cholesky
/// factor); otherwise PSD covariances are factored spectrally, which allows
/// exactly-zero noise components.
class GaussianSampler {
 public:
  /// Throws InvalidCovariance.
  explicit GaussianSampler(const SymMatrix& cov, bool require_pd = true);

  Index dim() const { return factor_.rows(); }
  /// `count` draws as rows, reproducible for a given (seed, stream).
  Matrix draw(Index count, std::uint64_t seed, std::uint64_t stream = 0) const;

 private:
  Matrix factor_;
};

/// `count` draws of (x, theta, y) as rows.
Matrix sample_joint(const JointGaussian& joint, Index count,
                    std::uint64_t seed, std::uint64_t stream = 0);

/// `count` draws of N(0, cov) as rows. Throws InvalidCovariance.
Matrix sample_gaussian(const SymMatrix& cov, Index count, std::uint64_t seed,
                       std::uint64_t stream = 0);

/// Sample mean with its standard error.
struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Index samples = 0;

  /// |mean - value| <= k_se * standard_error.
  bool agrees_with(double value, double k_se = 3.0) const;
};

MonteCarloEstimate summarize(const Vector& draws);

/// Empirical covariance (about zero mean, the library's convention) of
/// sample rows.
Matrix empirical_covariance(const Matrix& samples);

}  // namespace stratest

#endif  // STRATEST_GAUSSIAN_CORE_HPP_
