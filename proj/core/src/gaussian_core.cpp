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

#include "stratest/gaussian_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "stratest/errors.hpp"

namespace stratest {
namespace {

constexpr double kSignTolerance = 1e-12;
constexpr double kTieTolerance = 1e-10;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidMatrix(std::string(what) + ": non-finite entry");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> eigen_solve(const SymMatrix& a) {
  if (a.dim() == 0) throw InvalidDimensions("eigensolver: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("eigensolver did not converge");
  }
  return solver;
}

// Rebuild U f(L) U^T from a spectral decomposition.
template <typename F>
SymMatrix spectral_map(const SymMatrix& a, F f, const char* what) {
  auto solver = eigen_solve(a);
  const Vector& values = solver.eigenvalues();
  const double top = values.maxCoeff();
  if (!(top > 0.0) || values.minCoeff() <= kPdTolerance * top) {
    throw NotPositiveDefinite(std::string(what) +
                              ": matrix is not positive definite");
  }
  const Matrix& u = solver.eigenvectors();
  Vector mapped = values.unaryExpr(f);
  return SymMatrix::Symmetrized(u * mapped.asDiagonal() * u.transpose());
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidMatrix("SymMatrix: matrix is not square");
  }
  require_finite(m, "SymMatrix");
  if (m.size() > 0) {
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      throw InvalidMatrix("SymMatrix: asymmetry " + std::to_string(asym) +
                          " exceeds tolerance");
    }
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::Symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidMatrix("SymMatrix: matrix is not square");
  }
  require_finite(m, "SymMatrix");
  SymMatrix out;
  out.m_ = 0.5 * (m + m.transpose());
  return out;
}

SymMatrix SymMatrix::Identity(Index n) {
  return Symmetrized(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::Zero(Index n) { return Symmetrized(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::Diagonal(const Vector& d) {
  return Symmetrized(Matrix(d.asDiagonal()));
}

SymMatrix SymMatrix::block(Index start, Index size) const {
  if (start < 0 || size < 0 || start + size > dim()) {
    throw InvalidDimensions("SymMatrix::block out of range");
  }
  return Symmetrized(m_.block(start, start, size, size));
}

SymMatrix SymMatrix::select(std::span<const Index> indices) const {
  const auto n = static_cast<Index>(indices.size());
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index r = indices[static_cast<std::size_t>(i)];
      const Index c = indices[static_cast<std::size_t>(j)];
      if (r < 0 || r >= dim() || c < 0 || c >= dim()) {
        throw InvalidDimensions("SymMatrix::select index out of range");
      }
      out(i, j) = m_(r, c);
    }
  }
  return Symmetrized(out);
}

SymMatrix SymMatrix::congruence(const Matrix& b) const {
  if (b.cols() != dim()) {
    throw InvalidDimensions("congruence: column count does not match");
  }
  return Symmetrized(b * m_ * b.transpose());
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  if (other.dim() != dim()) throw InvalidDimensions("SymMatrix sum");
  return Symmetrized(m_ + other.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  if (other.dim() != dim()) throw InvalidDimensions("SymMatrix difference");
  return Symmetrized(m_ - other.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return Symmetrized(m_ * s); }

void canonicalize_sign(Eigen::Ref<Vector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignTolerance) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

EigPair smallest_eigpair(const SymMatrix& a) {
  auto solver = eigen_solve(a);
  EigPair out;
  out.value = solver.eigenvalues()(0);
  out.vector = solver.eigenvectors().col(0);
  out.vector.normalize();
  canonicalize_sign(out.vector);
  return out;
}

SmallestEigenspace smallest_eigenpairs(const SymMatrix& a, Index k) {
  if (k < 0 || k > a.dim()) {
    throw InvalidDimensions("smallest_eigenpairs: k out of range");
  }
  auto solver = eigen_solve(a);
  SmallestEigenspace out;
  out.values = solver.eigenvalues().head(k);
  out.vectors = solver.eigenvectors().leftCols(k);
  for (Index j = 0; j < k; ++j) {
    out.vectors.col(j).normalize();
    canonicalize_sign(out.vectors.col(j));
  }
  const Vector& all = solver.eigenvalues();
  const double scale = std::max(1.0, all.cwiseAbs().maxCoeff());
  if (k > 0 && k < a.dim()) {
    out.tie = std::abs(all(k) - all(k - 1)) <= kTieTolerance * scale;
  }
  if (k == 1 && a.dim() > 1) {
    out.tie = out.tie || std::abs(all(1) - all(0)) <= kTieTolerance * scale;
  }
  return out;
}

double min_eigenvalue(const SymMatrix& a) {
  return eigen_solve(a).eigenvalues().minCoeff();
}

double max_eigenvalue(const SymMatrix& a) {
  return eigen_solve(a).eigenvalues().maxCoeff();
}

bool is_positive_definite(const SymMatrix& a, double rel_tol) {
  const Vector values = eigen_solve(a).eigenvalues();
  const double top = values.maxCoeff();
  return top > 0.0 && values.minCoeff() > rel_tol * top;
}

bool is_positive_semidefinite(const SymMatrix& a, double abs_tol) {
  if (a.dim() == 0) return true;
  return min_eigenvalue(a) >= -abs_tol;
}

bool loewner_leq(const SymMatrix& lower, const SymMatrix& upper,
                 double abs_tol) {
  return is_positive_semidefinite(upper - lower, abs_tol);
}

SymMatrix matrix_sqrt(const SymMatrix& a) {
  return spectral_map(a, [](double v) { return std::sqrt(v); }, "matrix_sqrt");
}

SymMatrix inv_sqrt(const SymMatrix& a) {
  return spectral_map(
      a, [](double v) { return 1.0 / std::sqrt(v); }, "inv_sqrt");
}

SymMatrix pd_inverse(const SymMatrix& a) {
  return spectral_map(a, [](double v) { return 1.0 / v; }, "pd_inverse");
}

Matrix pseudo_inverse(const Matrix& a) {
  require_finite(a, "pseudo_inverse");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = std::numeric_limits<double>::epsilon() *
                        static_cast<double>(std::max(a.rows(), a.cols())) *
                        (s.size() > 0 ? s(0) : 0.0);
  Vector s_inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

JointGaussian::JointGaussian(Index n_x, Index n_y, SymMatrix covariance)
    : n_x_(n_x), n_y_(n_y), cov_(std::move(covariance)) {
  if (n_x < 1 || n_y < 0 || cov_.dim() != 2 * n_x + n_y) {
    throw InvalidDimensions("JointGaussian: covariance must be (2n_x+n_y)^2");
  }
  if (!is_positive_definite(cov_)) {
    throw InvalidCovariance("JointGaussian: covariance is not positive definite");
  }
}

JointGaussian JointGaussian::FromBlocks(const Matrix& v_xx,
                                        const Matrix& v_xtheta,
                                        const Matrix& v_xy,
                                        const Matrix& v_thetatheta,
                                        const Matrix& v_thetay,
                                        const Matrix& v_yy) {
  const Index nx = v_xx.rows();
  const Index ny = v_yy.rows();
  const bool ok = v_xx.cols() == nx && v_xtheta.rows() == nx &&
                  v_xtheta.cols() == nx && v_thetatheta.rows() == nx &&
                  v_thetatheta.cols() == nx && v_yy.cols() == ny &&
                  v_xy.rows() == nx && v_xy.cols() == ny &&
                  v_thetay.rows() == nx && v_thetay.cols() == ny;
  if (!ok) throw InvalidDimensions("JointGaussian: inconsistent block sizes");
  Matrix full(2 * nx + ny, 2 * nx + ny);
  full << v_xx, v_xtheta, v_xy, v_xtheta.transpose(), v_thetatheta, v_thetay,
      v_xy.transpose(), v_thetay.transpose(), v_yy;
  return JointGaussian(nx, ny, SymMatrix(full));
}

JointGaussian JointGaussian::WithoutSideChannel(const Matrix& v_xx,
                                                const Matrix& v_xtheta,
                                                const Matrix& v_thetatheta) {
  const Index nx = v_xx.rows();
  return FromBlocks(v_xx, v_xtheta, Matrix(nx, 0), v_thetatheta, Matrix(nx, 0),
                    Matrix(0, 0));
}

Matrix JointGaussian::v_xx() const {
  return cov_.matrix().block(0, 0, n_x_, n_x_);
}
Matrix JointGaussian::v_xtheta() const {
  return cov_.matrix().block(0, n_x_, n_x_, n_x_);
}
Matrix JointGaussian::v_xy() const {
  return cov_.matrix().block(0, 2 * n_x_, n_x_, n_y_);
}
Matrix JointGaussian::v_thetatheta() const {
  return cov_.matrix().block(n_x_, n_x_, n_x_, n_x_);
}
Matrix JointGaussian::v_thetay() const {
  return cov_.matrix().block(n_x_, 2 * n_x_, n_x_, n_y_);
}
Matrix JointGaussian::v_yy() const {
  return cov_.matrix().block(2 * n_x_, 2 * n_x_, n_y_, n_y_);
}

SymMatrix JointGaussian::state_covariance() const {
  return cov_.block(0, 2 * n_x_);
}

std::vector<Index> JointGaussian::x_indices() const {
  return index_range(0, n_x_);
}
std::vector<Index> JointGaussian::theta_indices() const {
  return index_range(n_x_, n_x_);
}
std::vector<Index> JointGaussian::y_indices() const {
  return index_range(2 * n_x_, n_y_);
}

LmsGain lms_gain(const SymMatrix& v_tt, const Matrix& v_tm,
                 const SymMatrix& v_mm) {
  if (v_tm.rows() != v_tt.dim() || v_tm.cols() != v_mm.dim()) {
    throw InvalidDimensions("lms_gain: block sizes do not match");
  }
  if (v_mm.dim() == 0) {
    return {Matrix::Zero(v_tt.dim(), 0), v_tt};
  }
  auto solver = eigen_solve(v_mm);
  const Vector& values = solver.eigenvalues();
  const double top = values.maxCoeff();
  if (!(top > 0.0) || values.minCoeff() <= kSingularTolerance * top) {
    throw SingularConditioning("lms_gain: conditioning covariance is singular");
  }
  const Matrix& u = solver.eigenvectors();
  const Matrix v_mm_inv = u * values.cwiseInverse().asDiagonal() * u.transpose();
  LmsGain out;
  out.gain = v_tm * v_mm_inv;
  out.error_covariance =
      SymMatrix::Symmetrized(v_tt.matrix() - out.gain * v_tm.transpose());
  return out;
}

std::vector<Index> index_range(Index begin, Index count) {
  std::vector<Index> out(static_cast<std::size_t>(std::max<Index>(count, 0)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = begin + static_cast<Index>(i);
  }
  return out;
}

SymMatrix schur_conditional(const SymMatrix& joint,
                            std::span<const Index> conditioned_on) {
  std::vector<bool> picked(static_cast<std::size_t>(joint.dim()), false);
  for (Index i : conditioned_on) {
    if (i < 0 || i >= joint.dim()) {
      throw InvalidDimensions("schur_conditional: index out of range");
    }
    picked[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> rest;
  for (Index i = 0; i < joint.dim(); ++i) {
    if (!picked[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  const SymMatrix v_rr = joint.select(rest);
  const SymMatrix v_cc = joint.select(conditioned_on);
  Matrix v_rc(static_cast<Index>(rest.size()),
              static_cast<Index>(conditioned_on.size()));
  for (Index i = 0; i < v_rc.rows(); ++i) {
    for (Index j = 0; j < v_rc.cols(); ++j) {
      v_rc(i, j) = joint(rest[static_cast<std::size_t>(i)],
                         conditioned_on[static_cast<std::size_t>(j)]);
    }
  }
  return lms_gain(v_rr, v_rc, v_cc).error_covariance;
}

SymMatrix readout_covariance(const SymMatrix& state_cov,
                             const LinearReadout& readout) {
  if (readout.noise.dim() != readout.dim()) {
    throw InvalidDimensions("readout: noise dimension mismatch");
  }
  return state_cov.congruence(readout.loadings) + readout.noise;
}

double expected_squared_error(const SymMatrix& state_cov, const Matrix& target,
                              const LinearReadout& readout,
                              const Matrix& gain) {
  if (gain.rows() != target.rows() || gain.cols() != readout.dim()) {
    throw InvalidDimensions("expected_squared_error: gain shape");
  }
  const Matrix& s = state_cov.matrix();
  const double v_tt = (target * s * target.transpose()).trace();
  const double cross = (gain * readout.loadings * s * target.transpose()).trace();
  const double v_hat =
      (gain * readout_covariance(state_cov, readout).matrix() * gain.transpose())
          .trace();
  return v_tt - 2.0 * cross + v_hat;
}

LmsGain lms_for_target(const SymMatrix& state_cov, const Matrix& target,
                       const LinearReadout& readout) {
  const Matrix& s = state_cov.matrix();
  return lms_gain(state_cov.congruence(target),
                  target * s * readout.loadings.transpose(),
                  readout_covariance(state_cov, readout));
}

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(seed ^ splitmix(stream + kGoldenGamma))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return splitmix(key_ + counter_ * kGoldenGamma);
}

GaussianSampler::GaussianSampler(const SymMatrix& cov, bool require_pd) {
  if (cov.dim() == 0) {
    throw InvalidCovariance("GaussianSampler: empty covariance");
  }
  if (require_pd) {
    if (!is_positive_definite(cov)) {
      throw InvalidCovariance("GaussianSampler: covariance is not PD");
    }
    Eigen::LLT<Matrix> llt(cov.matrix());
    if (llt.info() != Eigen::Success) {
      throw InvalidCovariance("GaussianSampler: Cholesky failed");
    }
    factor_ = llt.matrixL();
    return;
  }
  auto solver = eigen_solve(cov);
  Vector values = solver.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -kPdTolerance * scale) {
    throw InvalidCovariance("GaussianSampler: covariance is not PSD");
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  factor_ = solver.eigenvectors() * values.asDiagonal();
}

Matrix GaussianSampler::draw(Index count, std::uint64_t seed,
                             std::uint64_t stream) const {
  if (count < 1) throw InvalidDimensions("GaussianSampler: count must be >= 1");
  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal;
  Matrix g(dim(), count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < dim(); ++i) g(i, j) = normal(rng);
  }
  return (factor_ * g).transpose();
}

Matrix sample_joint(const JointGaussian& joint, Index count,
                    std::uint64_t seed, std::uint64_t stream) {
  return GaussianSampler(joint.covariance()).draw(count, seed, stream);
}

Matrix sample_gaussian(const SymMatrix& cov, Index count, std::uint64_t seed,
                       std::uint64_t stream) {
  return GaussianSampler(cov).draw(count, seed, stream);
}

bool MonteCarloEstimate::agrees_with(double value, double k_se) const {
  return std::abs(mean - value) <= k_se * standard_error;
}

MonteCarloEstimate summarize(const Vector& draws) {
  MonteCarloEstimate out;
  out.samples = draws.size();
  if (out.samples == 0) return out;
  out.mean = draws.mean();
  if (out.samples > 1) {
    const double var = (draws.array() - out.mean).square().sum() /
                       static_cast<double>(out.samples - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(out.samples));
  }
  return out;
}

Matrix empirical_covariance(const Matrix& samples) {
  if (samples.rows() == 0) {
    throw InvalidDimensions("empirical_covariance: no samples");
  }
  return samples.transpose() * samples / static_cast<double>(samples.rows());
}

}  // namespace stratest
