#pragma once

// Dense/sparse matrix aliases and the handful of LAPACK drivers the library needs.
// Eigen owns storage and products. The Hermitian eigensolvers go through LAPACKE (MRRR
// drivers), several times faster than Eigen's own at n ~ 3000. Each decomposition is
// checked against a random probe vector, because some optimised BLAS builds return wrong
// GEMM results on CPUs they misdetect, and that corrupts LAPACK silently.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mourre {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

namespace linalg {

inline void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string(routine) + " failed with info=" + std::to_string(info));
  }
}

/// Largest entry of |M - M^dagger|.
inline double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  const SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

inline double max_abs_entry(const SparseMatrix& m) {
  double worst = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline SparseMatrix symmetrized(const SparseMatrix& m) {
  SparseMatrix out = 0.5 * (m + SparseMatrix(m.adjoint()));
  out.prune(Complex(0.0, 0.0));
  return out;
}

inline bool is_real(const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

inline SparseMatrix diagonal(const RealVector& d) {
  SparseMatrix out(d.size(), d.size());
  out.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) out.insert(i, i) = d[i];
  out.makeCompressed();
  return out;
}

namespace detail {

/// ||M U x - U (w .* x)|| / (||M|| ||x||) for a fixed pseudo-random x; O(n^2).
template <class Mat>
double eigen_probe_residual(const Mat& m, const RealVector& w, const Mat& u) {
  const Eigen::Index n = w.size();
  if (n == 0) return 0.0;
  RealVector x(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    x[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  using Vec = Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>;
  const Vec ux = u * x.cast<typename Mat::Scalar>();
  const Vec lhs = m * ux;
  const Vec rhs = u * (w.array() * x.array()).matrix().cast<typename Mat::Scalar>();
  const double scale = std::max(w.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (lhs - rhs).norm() / (scale * x.norm());
}

inline void require_accurate(double residual, const char* routine) {
  if (!(residual <= 1e-9)) {
    throw std::runtime_error(std::string(routine) + " returned inaccurate eigenpairs (probe residual " +
                             std::to_string(residual) + "); the linked BLAS/LAPACK is unreliable on this CPU");
  }
}

inline std::pair<RealVector, RealMatrix> syevr(RealMatrix& a, char jobz) {
  const auto n = static_cast<lapack_int>(a.rows());
  RealVector w(n);
  RealMatrix z(jobz == 'V' ? n : 0, jobz == 'V' ? n : 0);
  if (n == 0) return {std::move(w), std::move(z)};
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                            w.data(), jobz == 'V' ? z.data() : nullptr, std::max<lapack_int>(n, 1),
                            support.data()),
             "dsyevr");
  if (found != n) throw std::runtime_error("dsyevr returned " + std::to_string(found) + " of " + std::to_string(n));
  return {std::move(w), std::move(z)};
}

inline std::pair<RealVector, Matrix> heevr(Matrix& a, char jobz) {
  const auto n = static_cast<lapack_int>(a.rows());
  RealVector w(n);
  Matrix z(jobz == 'V' ? n : 0, jobz == 'V' ? n : 0);
  if (n == 0) return {std::move(w), std::move(z)};
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, jobz, 'A', 'L', n, a.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                            w.data(), jobz == 'V' ? z.data() : nullptr, std::max<lapack_int>(n, 1),
                            support.data()),
             "zheevr");
  if (found != n) throw std::runtime_error("zheevr returned " + std::to_string(found) + " of " + std::to_string(n));
  return {std::move(w), std::move(z)};
}

}  // namespace detail

/// Real symmetric eigenproblem (dsyevr). Eigenvalues ascending.
inline std::pair<RealVector, RealMatrix> eigh(RealMatrix a) {
  const RealMatrix m = a;
  auto out = detail::syevr(a, 'V');
  detail::require_accurate(detail::eigen_probe_residual(m, out.first, out.second), "dsyevr");
  return out;
}

/// Complex Hermitian eigenproblem (zheevr). Eigenvalues ascending.
inline std::pair<RealVector, Matrix> eigh(Matrix a) {
  const Matrix m = a;
  auto out = detail::heevr(a, 'V');
  detail::require_accurate(detail::eigen_probe_residual(m, out.first, out.second), "zheevr");
  return out;
}

inline RealVector eigvalsh(RealMatrix a) { return detail::syevr(a, 'N').first; }

inline RealVector eigvalsh(Matrix a) {
  if (is_real(a)) return eigvalsh(RealMatrix(a.real()));
  return detail::heevr(a, 'N').first;
}

/// The k largest singular values, descending, zero-padded when the matrix is smaller.
/// Hermitian input uses |eigenvalues|; anything else goes through the smaller Gram matrix.
inline std::vector<double> top_singular_values(const Matrix& m, std::size_t k) {
  RealVector mags;
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  if (m.rows() == m.cols() && hermiticity_defect(m) <= 1e-12 * std::max(scale, 1e-300)) {
    mags = eigvalsh(symmetrized(m)).cwiseAbs();
  } else {
    Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
    mags = eigvalsh(symmetrized(gram)).cwiseMax(0.0).cwiseSqrt();
  }
  std::vector<double> s(mags.data(), mags.data() + mags.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  s.resize(k, 0.0);
  return s;
}

inline double operator_norm(const Matrix& m) { return top_singular_values(m, 1).front(); }

/// Spectral norm of a Hermitian sparse matrix by power iteration on M^2.
inline double hermitian_norm(const SparseMatrix& m, int max_iter = 500, double tol = 1e-10) {
  if (m.rows() == 0) return 0.0;
  Vector v = Vector::Ones(m.rows()).normalized();
  // Alternate signs so the start vector sees the top of the spectrum of stencil operators.
  for (Eigen::Index i = 1; i < v.size(); i += 2) v[i] = -v[i];
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = m * (m * v);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    v = w / nrm;
    const double est = std::sqrt(nrm);
    if (std::abs(est - prev) <= tol * est) return est;
    prev = est;
  }
  return prev;
}

}  // namespace linalg
}  // namespace mourre
