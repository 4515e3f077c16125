#pragma once

// Eigendecomposition of Hermitian matrices and the functional calculus built on it:
// spectral projections, f(M) for real or complex f, resolvents and e^{-itM}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "mourre/grid.hpp"
#include "mourre/linalg.hpp"

namespace mourre {

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending. Real symmetric sources keep
/// real eigenvectors, which halves memory and lets f(M) run on real BLAS.
class SpectralDecomposition {
 public:
  SpectralDecomposition() = default;
  SpectralDecomposition(RealVector values, RealMatrix vectors)
      : values_(std::move(values)), real_vectors_(std::move(vectors)), real_(true) {}
  SpectralDecomposition(RealVector values, Matrix vectors)
      : values_(std::move(values)), complex_vectors_(std::move(vectors)), real_(false) {}

  [[nodiscard]] const RealVector& eigenvalues() const { return values_; }
  [[nodiscard]] Eigen::Index dim() const { return values_.size(); }
  [[nodiscard]] bool has_real_vectors() const { return real_; }
  [[nodiscard]] const RealMatrix& real_vectors() const { return real_vectors_; }
  [[nodiscard]] const Matrix& complex_vectors() const { return complex_vectors_; }

  [[nodiscard]] Vector vector(Eigen::Index k) const {
    return real_ ? Vector(real_vectors_.col(k).cast<Complex>()) : Vector(complex_vectors_.col(k));
  }

  /// Columns selected by index, as complex vectors.
  [[nodiscard]] Matrix columns(const std::vector<Eigen::Index>& idx) const {
    Matrix out(dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = vector(idx[c]);
    return out;
  }

  /// U^dagger psi
  [[nodiscard]] Vector to_eigenbasis(const Vector& psi) const {
    if (real_) return combine(real_vectors_.transpose() * split(psi));
    return complex_vectors_.adjoint() * psi;
  }

  /// U c
  [[nodiscard]] Vector from_eigenbasis(const Vector& c) const {
    if (real_) return combine(real_vectors_ * split(c));
    return complex_vectors_ * c;
  }

 private:
  // Products are formed on contiguous real storage: Eigen's BLAS bindings mishandle
  // strided destinations such as Vector::real().
  static RealMatrix split(const Vector& v) {
    RealMatrix ri(v.size(), 2);
    ri.col(0) = v.real();
    ri.col(1) = v.imag();
    return ri;
  }
  static Vector combine(const RealMatrix& ri) {
    Vector v(ri.rows());
    for (Eigen::Index i = 0; i < ri.rows(); ++i) v[i] = Complex(ri(i, 0), ri(i, 1));
    return v;
  }

  RealVector values_;
  RealMatrix real_vectors_;
  Matrix complex_vectors_;
  bool real_ = true;
};

namespace detail {
inline double hermitian_tolerance(double max_entry) { return 1e-12 * std::max(max_entry, 1e-300); }
}  // namespace detail

inline SpectralDecomposition eigendecompose(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigendecompose: matrix is not square");
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  const double defect = linalg::hermiticity_defect(m);
  if (defect > detail::hermitian_tolerance(scale)) {
    throw std::invalid_argument("eigendecompose: hermiticity defect " + std::to_string(defect) + " too large");
  }
  if (linalg::is_real(m)) {
    auto [w, u] = linalg::eigh(RealMatrix(0.5 * (m.real() + m.real().transpose())));
    return {std::move(w), std::move(u)};
  }
  auto [w, u] = linalg::eigh(linalg::symmetrized(m));
  return {std::move(w), std::move(u)};
}

inline SpectralDecomposition eigendecompose(const SparseMatrix& m) {
  const double defect = linalg::hermiticity_defect(m);
  if (defect > detail::hermitian_tolerance(linalg::max_abs_entry(m))) {
    throw std::invalid_argument("eigendecompose: hermiticity defect " + std::to_string(defect) + " too large");
  }
  return eigendecompose(Matrix(m));
}

struct EnergyWindow {
  double lambda = 0.0;
  double eps = 0.0;

  EnergyWindow() = default;
  EnergyWindow(double center, double half_width) : lambda(center), eps(half_width) {
    if (!(half_width > 0.0)) throw std::invalid_argument("EnergyWindow: eps must be positive");
  }
  [[nodiscard]] bool contains(double e) const { return e > lambda - eps && e < lambda + eps; }
};

/// Indices k with lambda_k in the open window.
inline std::vector<Eigen::Index> window_indices(const SpectralDecomposition& dec, const EnergyWindow& win) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < dec.dim(); ++k)
    if (win.contains(dec.eigenvalues()[k])) idx.push_back(k);
  return idx;
}

struct Projection {
  Matrix matrix;
  Eigen::Index rank = 0;
};

/// E(lambda; eps) = E((lambda - eps, lambda + eps)).
inline Projection spectral_projection(const SpectralDecomposition& dec, const EnergyWindow& win) {
  const auto idx = window_indices(dec, win);
  Projection p;
  p.rank = static_cast<Eigen::Index>(idx.size());
  if (idx.empty()) {
    p.matrix = Matrix::Zero(dec.dim(), dec.dim());
    return p;
  }
  const Matrix u = dec.columns(idx);
  p.matrix = u * u.adjoint();
  return p;
}

/// Projection onto eigenvalues strictly above `threshold`: the finite-box stand-in for the
/// absolutely continuous subspace (eigenvalues above the lowest threshold plus a margin).
inline Projection scattering_projection(const SpectralDecomposition& dec, double threshold) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < dec.dim(); ++k)
    if (dec.eigenvalues()[k] > threshold) idx.push_back(k);
  Projection p;
  p.rank = static_cast<Eigen::Index>(idx.size());
  const Matrix u = dec.columns(idx);
  p.matrix = idx.empty() ? Matrix::Zero(dec.dim(), dec.dim()) : Matrix(u * u.adjoint());
  return p;
}

/// U f(Lambda) U^dagger. Eigenvalues where f vanishes are skipped, so compactly supported f
/// costs only its support. Throws std::domain_error when f is not finite at an eigenvalue.
template <class F>
Matrix apply_function(const SpectralDecomposition& dec, F&& f) {
  using R = std::invoke_result_t<F, double>;
  constexpr bool real_valued = std::is_floating_point_v<R>;
  const Eigen::Index n = dec.dim();
  std::vector<Eigen::Index> support;
  std::vector<Complex> values;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex fk = Complex(f(dec.eigenvalues()[k]));
    if (!std::isfinite(fk.real()) || !std::isfinite(fk.imag())) {
      throw std::domain_error("apply_function: f is singular at eigenvalue " +
                              std::to_string(dec.eigenvalues()[k]));
    }
    if (fk != Complex(0.0, 0.0)) {
      support.push_back(k);
      values.push_back(fk);
    }
  }
  const auto r = static_cast<Eigen::Index>(support.size());
  if (r == 0) return Matrix::Zero(n, n);

  if (dec.has_real_vectors()) {
    RealMatrix u(n, r);
    for (Eigen::Index c = 0; c < r; ++c) u.col(c) = dec.real_vectors().col(support[static_cast<std::size_t>(c)]);
    RealVector fr(r), fi(r);
    for (Eigen::Index c = 0; c < r; ++c) {
      fr[c] = values[static_cast<std::size_t>(c)].real();
      fi[c] = values[static_cast<std::size_t>(c)].imag();
    }
    const RealMatrix re = u * fr.asDiagonal() * u.transpose();
    if constexpr (real_valued) {
      return re.cast<Complex>();
    } else {
      const RealMatrix im = u * fi.asDiagonal() * u.transpose();
      Matrix out(n, n);
      out.real() = re;
      out.imag() = im;
      return out;
    }
  }
  Matrix u(n, r);
  Vector fv(r);
  for (Eigen::Index c = 0; c < r; ++c) {
    u.col(c) = dec.complex_vectors().col(support[static_cast<std::size_t>(c)]);
    fv[c] = values[static_cast<std::size_t>(c)];
  }
  return u * fv.asDiagonal() * u.adjoint();
}

/// (M - z)^{-1}; z must be non-real.
inline Matrix resolvent(const SpectralDecomposition& dec, Complex z) {
  if (z.imag() == 0.0) throw std::domain_error("resolvent: z must have nonzero imaginary part");
  return apply_function(dec, [z](double e) { return Complex(1.0) / (Complex(e) - z); });
}

/// e^{-itM} psi
inline Vector propagate(const SpectralDecomposition& dec, const Vector& state, double t) {
  if (state.size() != dec.dim()) throw std::invalid_argument("propagate: state dimension mismatch");
  Vector c = dec.to_eigenbasis(state);
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(Complex(0.0, -t * dec.eigenvalues()[k]));
  return dec.from_eigenbasis(c);
}

enum class SmoothingKind { bump, plateau, resolvent_power, custom };

/// Real function eta used to localise in energy.
struct SmoothingFunction {
  SmoothingKind kind = SmoothingKind::bump;
  double center = 0.0;
  double width = 0.0;
  std::string description;
  std::function<double(double)> fn;

  double operator()(double x) const { return fn(x); }

  /// exp(1 - 1/(1 - u^2)) with u = (x - center)/width: C_c^infinity, eta(center) = 1.
  static SmoothingFunction bump(double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("SmoothingFunction::bump: width must be positive");
    SmoothingFunction s;
    s.kind = SmoothingKind::bump;
    s.center = center;
    s.width = width;
    s.description = "bump(center=" + std::to_string(center) + ",width=" + std::to_string(width) + ")";
    s.fn = [center, width](double x) { return smooth::bump((x - center) / width); };
    return s;
  }

  /// 1 on [lo, hi], mollifier ramps of length `ramp` on both sides, 0 beyond.
  static SmoothingFunction plateau(double lo, double hi, double ramp) {
    if (!(hi > lo) || !(ramp > 0.0)) throw std::invalid_argument("SmoothingFunction::plateau: bad interval");
    SmoothingFunction s;
    s.kind = SmoothingKind::plateau;
    s.center = 0.5 * (lo + hi);
    s.width = 0.5 * (hi - lo) + ramp;
    s.description = "plateau(lo=" + std::to_string(lo) + ",hi=" + std::to_string(hi) +
                    ",ramp=" + std::to_string(ramp) + ")";
    s.fn = [lo, hi, ramp](double x) {
      if (x < lo) return smooth::transition((x - (lo - ramp)) / ramp);
      if (x > hi) return smooth::transition(((hi + ramp) - x) / ramp);
      return 1.0;
    };
    return s;
  }

  /// (width^2 / ((x - center)^2 + width^2))^power: positive everywhere, not compactly supported.
  static SmoothingFunction resolvent_power(double center, double width, int power = 1) {
    if (!(width > 0.0) || power < 1) throw std::invalid_argument("SmoothingFunction::resolvent_power: bad args");
    SmoothingFunction s;
    s.kind = SmoothingKind::resolvent_power;
    s.center = center;
    s.width = width;
    s.description = "resolvent_power(center=" + std::to_string(center) + ",width=" + std::to_string(width) +
                    ",power=" + std::to_string(power) + ")";
    s.fn = [center, width, power](double x) {
      const double d = x - center;
      return std::pow(width * width / (d * d + width * width), power);
    };
    return s;
  }

  static SmoothingFunction custom(std::function<double(double)> f, double center, std::string description) {
    if (f(center) == 0.0) throw std::invalid_argument("SmoothingFunction::custom: eta(center) must be nonzero");
    SmoothingFunction s;
    s.kind = SmoothingKind::custom;
    s.center = center;
    s.description = std::move(description);
    s.fn = std::move(f);
    return s;
  }
};

}  // namespace mourre
