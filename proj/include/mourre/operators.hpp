#pragma once

// Discretised operators of the two-channel steplike model:
//   H   = -Delta + V                     on L^2([-L, L])
//   H0  = (-Delta + v_-) (+) (-Delta + v_+)   on two copies
//   D   = (XP + PX)/2, A0 = (D, D), A = j D j
//   J(phi_-, phi_+) = j_- phi_- + j_+ phi_+
// plus the commutators i[H, A], i[H0, A0] and the resolvent differences B(z), B_+-(z).
//
// -Delta is the 3-point Dirichlet stencil and P = -i d/dx the centred difference, so
// every local operator is banded and kept sparse; dense matrices only appear once a
// function of an operator is taken.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mourre/grid.hpp"
#include "mourre/linalg.hpp"
#include "mourre/spectral.hpp"

namespace mourre {

struct HermitianOperator {
  Matrix entries;
  double hermiticity_defect = 0.0;

  static HermitianOperator checked(Matrix m) {
    HermitianOperator h;
    h.hermiticity_defect = linalg::hermiticity_defect(m);
    const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    if (h.hermiticity_defect > 1e-12 * std::max(scale, 1e-300)) {
      throw std::invalid_argument("HermitianOperator: hermiticity defect " +
                                  std::to_string(h.hermiticity_defect) + " exceeds tolerance");
    }
    h.entries = std::move(m);
    return h;
  }
  [[nodiscard]] Eigen::Index dim() const { return entries.rows(); }
};

struct RectOperator {
  Matrix entries;
  [[nodiscard]] Eigen::Index rows() const { return entries.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return entries.cols(); }
};

/// Operator on H0 = L^2 (+) L^2 with exactly zero off-diagonal blocks.
struct BlockDiagonal {
  SparseMatrix minus;
  SparseMatrix plus;

  [[nodiscard]] SparseMatrix assembled() const {
    const Eigen::Index n = minus.rows();
    SparseMatrix out(2 * n, 2 * n);
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(static_cast<std::size_t>(minus.nonZeros() + plus.nonZeros()));
    for (int k = 0; k < minus.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(minus, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < plus.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(plus, k); it; ++it) t.emplace_back(n + it.row(), n + it.col(), it.value());
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }
  [[nodiscard]] HermitianOperator dense() const { return HermitianOperator::checked(Matrix(assembled())); }
};

/// State (phi_-, phi_+) in H0.
struct TwoSpaceState {
  Vector phi_minus;
  Vector phi_plus;

  [[nodiscard]] double norm() const { return std::sqrt(phi_minus.squaredNorm() + phi_plus.squaredNorm()); }
  [[nodiscard]] Vector stacked() const {
    Vector v(phi_minus.size() + phi_plus.size());
    v << phi_minus, phi_plus;
    return v;
  }
};

/// J(phi_-, phi_+) = j_- phi_- + j_+ phi_+, J* psi = (j_- psi, j_+ psi).
struct Identification {
  RealVector j_minus;
  RealVector j_plus;

  [[nodiscard]] Vector apply(const TwoSpaceState& s) const {
    return j_minus.cast<Complex>().cwiseProduct(s.phi_minus) + j_plus.cast<Complex>().cwiseProduct(s.phi_plus);
  }
  [[nodiscard]] TwoSpaceState adjoint_apply(const Vector& psi) const {
    return {j_minus.cast<Complex>().cwiseProduct(psi), j_plus.cast<Complex>().cwiseProduct(psi)};
  }
  /// n x 2n matrix.
  [[nodiscard]] RectOperator dense() const {
    const Eigen::Index n = j_minus.size();
    RectOperator r{Matrix::Zero(n, 2 * n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      r.entries(i, i) = j_minus[i];
      r.entries(i, n + i) = j_plus[i];
    }
    return r;
  }
  /// ||J|| = max_x sqrt(j_-^2 + j_+^2)
  [[nodiscard]] double norm() const { return (j_minus.cwiseAbs2() + j_plus.cwiseAbs2()).cwiseSqrt().maxCoeff(); }
};

/// Which discretisation of i[H, A] to use.
///
/// dirichlet_box is the exact matrix commutator i(HA - AH) of the truncated operators. Its
/// compression onto any spectral subspace of H is traceless (finite-dimensional virial), so it
/// cannot show Mourre positivity. open_boundary restricts the commutator of the untruncated
/// lattice operators to the box: it adds back the boundary flux term that Dirichlet truncation
/// subtracts, and is what the rho estimators use.
enum class CommutatorForm { dirichlet_box, open_boundary };

inline std::string to_string(CommutatorForm f) {
  return f == CommutatorForm::dirichlet_box ? "dirichlet_box" : "open_boundary";
}

inline SparseMatrix build_laplacian(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  const double h2 = grid.spacing * grid.spacing;
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 / h2);
    if (i > 0) t.emplace_back(i, i - 1, -1.0 / h2);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0 / h2);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// P = -i d/dx, centred difference, Dirichlet ends.
inline SparseMatrix build_momentum(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  const double c = 1.0 / (2.0 * grid.spacing);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i + 1 < n) t.emplace_back(i, i + 1, Complex(0.0, -c));
    if (i > 0) t.emplace_back(i, i - 1, Complex(0.0, c));
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// D = (XP + PX)/2, Hermitian by construction.
inline SparseMatrix build_dilation(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  const double c = 1.0 / (2.0 * grid.spacing);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i + 1 < n) t.emplace_back(i, i + 1, Complex(0.0, -c * 0.5 * (grid.nodes[i] + grid.nodes[i + 1])));
    if (i > 0) t.emplace_back(i, i - 1, Complex(0.0, c * 0.5 * (grid.nodes[i] + grid.nodes[i - 1])));
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// i(MN - NM), symmetrised.
inline SparseMatrix commutator_i(const SparseMatrix& m, const SparseMatrix& n) {
  const SparseMatrix mn = m * n;
  const SparseMatrix nm = n * m;
  return linalg::symmetrized(SparseMatrix(kI * (mn - nm)));
}

struct OperatorSet {
  Grid grid;
  CutoffPair cutoffs;
  PotentialField potential;

  SparseMatrix laplacian;  // -Delta
  SparseMatrix H;
  BlockDiagonal H0;
  SparseMatrix D;
  BlockDiagonal A0;        // (D, D)
  SparseMatrix A;          // j D j
  Identification J;
  SparseMatrix commutator_iHA;  // i[H, A], Dirichlet box
  BlockDiagonal commutator_iH0A0;
  /// Diagonal boundary-flux terms: open-boundary form = box form + diag(flux).
  RealVector boundary_flux_HA;
  RealVector boundary_flux_H0A0;

  [[nodiscard]] Eigen::Index dim() const { return static_cast<Eigen::Index>(grid.size); }

  [[nodiscard]] SparseMatrix commutator(CommutatorForm form) const {
    if (form == CommutatorForm::dirichlet_box) return commutator_iHA;
    return commutator_iHA + linalg::diagonal(boundary_flux_HA);
  }
  [[nodiscard]] BlockDiagonal commutator0(CommutatorForm form) const {
    if (form == CommutatorForm::dirichlet_box) return commutator_iH0A0;
    const SparseMatrix flux = linalg::diagonal(boundary_flux_H0A0);
    return {commutator_iH0A0.minus + flux, commutator_iH0A0.plus + flux};
  }
};

namespace detail {

/// Flux through the two Dirichlet walls of i[-Delta, j D j]: the part of the lattice commutator
/// that couples box nodes 0 and n-1 to the ghost nodes just outside. Only diagonal entries are
/// touched; the ghost nodes carry the boundary values of j.
inline RealVector boundary_flux(const Grid& grid, const RealVector& j) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  const double dx = grid.spacing;
  const double dx3 = dx * dx * dx;
  RealVector flux = RealVector::Zero(n);
  const double x0 = grid.nodes[0];
  const double xg_left = x0 - dx;
  flux[0] = -j[0] * j[0] * (xg_left + x0) / (2.0 * dx3);
  const double xn = grid.nodes[n - 1];
  const double xg_right = xn + dx;
  flux[n - 1] = j[n - 1] * j[n - 1] * (xn + xg_right) / (2.0 * dx3);
  return flux;
}

inline void check_same_grid(const Grid& grid, Eigen::Index size, const char* what) {
  if (size != static_cast<Eigen::Index>(grid.size)) {
    throw std::invalid_argument(std::string("build_pair: ") + what + " not sampled on this grid");
  }
}

}  // namespace detail

inline OperatorSet build_pair(const Grid& grid, const PotentialField& pot, const CutoffPair& cut) {
  detail::check_same_grid(grid, pot.v.size(), "potential");
  detail::check_same_grid(grid, cut.j_plus.size(), "cutoffs");
  OperatorSet s;
  s.grid = grid;
  s.cutoffs = cut;
  s.potential = pot;
  const auto n = static_cast<Eigen::Index>(grid.size);

  s.laplacian = build_laplacian(grid);
  s.H = s.laplacian + linalg::diagonal(pot.v);
  const SparseMatrix id = linalg::diagonal(RealVector::Ones(n));
  s.H0 = {s.laplacian + pot.v_minus * id, s.laplacian + pot.v_plus * id};

  s.D = build_dilation(grid);
  s.A0 = {s.D, s.D};
  const SparseMatrix jd = linalg::diagonal(cut.j);
  s.A = linalg::symmetrized(SparseMatrix(jd * s.D * jd));
  s.J = {cut.j_minus, cut.j_plus};

  s.commutator_iHA = commutator_i(s.H, s.A);
  s.commutator_iH0A0 = {commutator_i(s.H0.minus, s.D), commutator_i(s.H0.plus, s.D)};
  s.boundary_flux_HA = detail::boundary_flux(grid, cut.j);
  s.boundary_flux_H0A0 = detail::boundary_flux(grid, RealVector::Ones(n));
  return s;
}

/// i[H, A] from the closed-form expansion
///   [A, H] = [j P id j, -Delta] - i j^2 id v' + (i/2)[j^2, -Delta],
/// with P id = P X (multiply by x, then differentiate). Returned as -i times that, symmetrised.
inline SparseMatrix build_commutator_longrange(const OperatorSet& s) {
  if (!s.potential.v_prime) {
    throw std::invalid_argument("build_commutator_longrange: potential has no derivative (v_prime missing)");
  }
  const auto& x = s.grid.nodes;
  const RealVector& j = s.cutoffs.j;
  const SparseMatrix jd = linalg::diagonal(j);
  const SparseMatrix j2 = linalg::diagonal(j.cwiseAbs2());
  const SparseMatrix px = build_momentum(s.grid) * linalg::diagonal(x);
  const SparseMatrix jpxj = jd * px * jd;
  const RealVector middle = j.cwiseAbs2().cwiseProduct(x).cwiseProduct(*s.potential.v_prime);

  SparseMatrix a_h = SparseMatrix(jpxj * s.laplacian) - SparseMatrix(s.laplacian * jpxj);
  a_h += Complex(0.0, -1.0) * linalg::diagonal(middle);
  a_h += Complex(0.0, 0.5) * (SparseMatrix(j2 * s.laplacian) - SparseMatrix(s.laplacian * j2));
  return linalg::symmetrized(SparseMatrix(Complex(0.0, -1.0) * a_h));
}

/// Decompositions of H and of both channel blocks of H0.
struct Spectra {
  SpectralDecomposition H;
  SpectralDecomposition H0_minus;
  SpectralDecomposition H0_plus;
};

inline Spectra decompose(const OperatorSet& s) {
  return {eigendecompose(s.H), eigendecompose(s.H0.minus), eigendecompose(s.H0.plus)};
}

enum class Channel { minus, plus };

inline const SpectralDecomposition& channel_spectrum(const Spectra& sp, Channel c) {
  return c == Channel::minus ? sp.H0_minus : sp.H0_plus;
}

inline const RealVector& channel_cutoff(const OperatorSet& s, Channel c) {
  return c == Channel::minus ? s.cutoffs.j_minus : s.cutoffs.j_plus;
}

inline double channel_limit(const OperatorSet& s, Channel c) {
  return c == Channel::minus ? s.potential.v_minus : s.potential.v_plus;
}

namespace detail {
inline void require_nonreal(Complex z, const char* where) {
  if (z.imag() == 0.0) throw std::domain_error(std::string(where) + ": z must be non-real");
}
}  // namespace detail

/// One column block of B(z): j_c R_c(z) - R(z) j_c  (n x n).
inline Matrix build_B_block(const OperatorSet& s, Complex z, Channel c, const Spectra& sp, const Matrix& resolvent_H) {
  const Matrix rc = resolvent(channel_spectrum(sp, c), z);
  const RealVector& jc = channel_cutoff(s, c);
  const Vector jcc = jc.cast<Complex>();
  return jcc.asDiagonal() * rc - resolvent_H * jcc.asDiagonal();
}

/// B(z) = J R0(z) - R(z) J, an n x 2n matrix.
inline RectOperator build_B(const OperatorSet& s, Complex z, const Spectra& sp) {
  detail::require_nonreal(z, "build_B");
  const Eigen::Index n = s.dim();
  const Matrix r = resolvent(sp.H, z);
  RectOperator b{Matrix(n, 2 * n)};
  b.entries.leftCols(n) = build_B_block(s, z, Channel::minus, sp, r);
  b.entries.rightCols(n) = build_B_block(s, z, Channel::plus, sp, r);
  return b;
}

/// B_+-(z) = (H - z)^{-1} { [-Delta, j_+-] + j_+-(V - v_+-) } (-Delta + v_+- - z)^{-1}.
inline Matrix build_B_pm(const OperatorSet& s, Complex z, Channel c, const Spectra& sp) {
  detail::require_nonreal(z, "build_B_pm");
  const RealVector& jc = channel_cutoff(s, c);
  const SparseMatrix jd = linalg::diagonal(jc);
  const RealVector shifted = s.potential.v.array() - channel_limit(s, c);
  SparseMatrix middle = SparseMatrix(s.laplacian * jd) - SparseMatrix(jd * s.laplacian);
  middle += linalg::diagonal(jc.cwiseProduct(shifted));
  const Matrix rc = resolvent(channel_spectrum(sp, c), z);
  const Matrix r = resolvent(sp.H, z);
  return r * (middle * rc);
}

}  // namespace mourre
