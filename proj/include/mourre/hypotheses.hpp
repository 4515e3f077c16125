#pragma once

// Numerical stand-ins for the compactness and regularity hypotheses of the transfer theorem.
//
// "X is compact" becomes: the top singular values of X are stable across grid refinements and
// decay fast within each level. The identity is the control that must fail this test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mourre/linalg.hpp"
#include "mourre/operators.hpp"
#include "mourre/parallel.hpp"
#include "mourre/spectral.hpp"

namespace mourre {

enum class Assumption { ii, iii, iv };

inline std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::ii: return "ii";
    case Assumption::iii: return "iii";
    case Assumption::iv: return "iv";
  }
  return "?";
}

inline Assumption assumption_from_string(const std::string& s) {
  if (s == "ii") return Assumption::ii;
  if (s == "iii") return Assumption::iii;
  if (s == "iv") return Assumption::iv;
  throw std::invalid_argument("unknown assumption tag '" + s + "' (expected ii, iii or iv)");
}

namespace detail {

inline Matrix diag_times(const RealVector& d, const Matrix& m) { return d.cast<Complex>().asDiagonal() * m; }
inline Matrix times_diag(const Matrix& m, const RealVector& d) { return m * d.cast<Complex>().asDiagonal(); }

/// i(M F - F M) for sparse M, dense F.
inline Matrix commutator_i(const SparseMatrix& m, const Matrix& f) {
  const Matrix mf = m * f;
  const Matrix fm = f * m;
  return kI * (mf - fm);
}

}  // namespace detail

/// The finite-dimensional matrix of one of the differences assumed compact:
///   ii : J [iA0, eta(H0)] J* - [iA, eta(H)]      (n x n, Hermitian)
///   iii: J eta(H0) - eta(H) J                     (n x 2n)
///   iv : eta(H) (J J* - 1) eta(H)                 (n x n, Hermitian)
inline Matrix assumption_operator(const OperatorSet& s, const Spectra& sp, Assumption which,
                                  const SmoothingFunction& eta) {
  const Matrix eh = apply_function(sp.H, eta.fn);
  const RealVector& jm = s.cutoffs.j_minus;
  const RealVector& jp = s.cutoffs.j_plus;
  switch (which) {
    case Assumption::iv: {
      const RealVector defect = s.cutoffs.jj_sum_sq.array() - 1.0;
      return linalg::symmetrized(Matrix(eh * detail::diag_times(defect, eh)));
    }
    case Assumption::iii: {
      const Eigen::Index n = s.dim();
      Matrix out(n, 2 * n);
      out.leftCols(n) = detail::diag_times(jm, apply_function(sp.H0_minus, eta.fn)) - detail::times_diag(eh, jm);
      out.rightCols(n) = detail::diag_times(jp, apply_function(sp.H0_plus, eta.fn)) - detail::times_diag(eh, jp);
      return out;
    }
    case Assumption::ii: {
      const Matrix cm = detail::commutator_i(s.A0.minus, apply_function(sp.H0_minus, eta.fn));
      const Matrix cp = detail::commutator_i(s.A0.plus, apply_function(sp.H0_plus, eta.fn));
      Matrix out = detail::times_diag(detail::diag_times(jm, cm), jm) + detail::times_diag(detail::diag_times(jp, cp), jp);
      out -= detail::commutator_i(s.A, eh);
      return linalg::symmetrized(out);
    }
  }
  throw std::invalid_argument("assumption_operator: invalid tag");
}

struct CompactnessThresholds {
  std::size_t keep = 40;          // singular values stored per level
  std::size_t drift_count = 10;   // sigma_1..sigma_k compared across levels
  std::size_t tail_index = 20;    // tail ratio sigma_k / sigma_1
  double max_drift = 0.10;
  double compact_tail = 1e-2;
  double noncompact_tail = 0.5;
};

enum class CompactnessVerdict { compact_consistent, non_compact, inconclusive };

inline std::string to_string(CompactnessVerdict v) {
  switch (v) {
    case CompactnessVerdict::compact_consistent: return "compact-consistent";
    case CompactnessVerdict::non_compact: return "non-compact";
    case CompactnessVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct RefinementLevel {
  double half_length = 40.0;
  std::size_t size = 801;
};

struct CompactnessReport {
  std::string operator_label;
  std::vector<RefinementLevel> levels;
  std::vector<std::vector<double>> singular_values;
  std::vector<double> tail_ratio;
  /// max over k <= drift_count and levels of |sigma_k(level) - sigma_k(finest)| / sigma_1(finest)
  double stability = 0.0;
  CompactnessThresholds thresholds;
  CompactnessVerdict verdict = CompactnessVerdict::inconclusive;
  std::string notes;
};

/// Classifies the family builder(level) from its singular values. Levels must be ordered
/// coarse to fine; the last one is the reference for the drift.
inline CompactnessReport classify_singular_values(std::string label, std::vector<RefinementLevel> levels,
                                                  std::vector<std::vector<double>> sv,
                                                  const CompactnessThresholds& th = {}) {
  if (levels.size() < 2) throw std::invalid_argument("compactness_report: at least two refinement levels required");
  if (th.tail_index == 0 || th.tail_index > th.keep || th.drift_count == 0 || th.drift_count > th.keep) {
    throw std::invalid_argument("compactness_report: tail_index and drift_count must lie in [1, keep]");
  }
  CompactnessReport r;
  r.operator_label = std::move(label);
  r.levels = std::move(levels);
  r.thresholds = th;
  for (auto& s : sv) {
    s.resize(th.keep, 0.0);
    r.tail_ratio.push_back(s.front() > 0.0 ? s[th.tail_index - 1] / s.front() : 0.0);
  }
  r.singular_values = std::move(sv);
  const auto& finest = r.singular_values.back();
  const double scale = finest.front();
  for (const auto& s : r.singular_values)
    for (std::size_t k = 0; k < th.drift_count; ++k)
      r.stability = std::max(r.stability, scale > 0.0 ? std::abs(s[k] - finest[k]) / scale : 0.0);

  const bool flat_everywhere = std::all_of(r.tail_ratio.begin(), r.tail_ratio.end(),
                                           [&](double t) { return t > th.noncompact_tail; });
  if (scale == 0.0) {
    r.verdict = CompactnessVerdict::compact_consistent;
    r.notes = "operator vanishes at the finest level";
  } else if (flat_everywhere) {
    r.verdict = CompactnessVerdict::non_compact;
  } else if (r.stability < th.max_drift && r.tail_ratio.back() < th.compact_tail) {
    r.verdict = CompactnessVerdict::compact_consistent;
  } else {
    r.verdict = CompactnessVerdict::inconclusive;
  }
  return r;
}

/// builder(level) -> Matrix. Levels are built in parallel when threads > 1; results are
/// assembled in level order.
template <class Builder>
CompactnessReport compactness_report(std::string label, Builder&& builder, const std::vector<RefinementLevel>& levels,
                                     const CompactnessThresholds& th = {}, unsigned threads = 1) {
  if (levels.size() < 2) throw std::invalid_argument("compactness_report: at least two refinement levels required");
  auto sv = parallel_map(levels.size(), threads, [&](std::size_t i) {
    try {
      return linalg::top_singular_values(builder(levels[i]), th.keep);
    } catch (const std::exception& e) {
      throw std::runtime_error("level " + std::to_string(i) + " (L=" + std::to_string(levels[i].half_length) +
                               ", n=" + std::to_string(levels[i].size) + "): " + e.what());
    }
  });
  return classify_singular_values(std::move(label), levels, std::move(sv), th);
}

struct SmoothedOperator {
  Matrix matrix;
  std::string smoothing;
};

/// Energy smoothing for the short-range operator: 1 on [min(v_-, v_+) + delta, e_max].
inline SmoothingFunction default_domain_smoothing(const OperatorSet& s, double delta = 0.01, double e_max = 4.0,
                                                  double ramp = 0.25) {
  return SmoothingFunction::plateau(std::min(s.potential.v_minus, s.potential.v_plus) + delta, e_max, ramp);
}

/// B(z) A0 S with S = (eta~(H0_-), eta~(H0_+)): the bounded realisation of B(z)A0 on D(A0).
/// Columns are [B_-(z) D eta~(H0_-) | B_+(z) D eta~(H0_+)].
inline SmoothedOperator short_range_operator(const OperatorSet& s, const Spectra& sp, Complex z,
                                             const SmoothingFunction& smoothing) {
  detail::require_nonreal(z, "short_range_operator");
  const Eigen::Index n = s.dim();
  const Matrix r = resolvent(sp.H, z);
  SmoothedOperator out{Matrix(n, 2 * n), smoothing.description};
  for (Channel c : {Channel::minus, Channel::plus}) {
    const Matrix b = build_B_block(s, z, c, sp, r);
    const Matrix ds = s.D * apply_function(channel_spectrum(sp, c), smoothing.fn);
    (c == Channel::minus ? out.matrix.leftCols(n) : out.matrix.rightCols(n)) = b * ds;
  }
  return out;
}

inline SmoothedOperator short_range_operator(const OperatorSet& s, const Spectra& sp, Complex z) {
  return short_range_operator(s, sp, z, default_domain_smoothing(s));
}

/// R(i) (J i[H0, A0] J* - i[H, A]) R(i), with i[H, A] from the closed-form expansion and
/// i[H0, A0] the box commutator of each channel.
inline Matrix long_range_operator(const OperatorSet& s, const Spectra& sp) {
  const SparseMatrix c = build_commutator_longrange(s);
  const SparseMatrix jm = linalg::diagonal(s.cutoffs.j_minus);
  const SparseMatrix jp = linalg::diagonal(s.cutoffs.j_plus);
  const SparseMatrix glued = SparseMatrix(jm * s.commutator_iH0A0.minus * jm) +
                             SparseMatrix(jp * s.commutator_iH0A0.plus * jp);
  const SparseMatrix diff = glued - c;
  const Matrix r = resolvent(sp.H, Complex(0.0, 1.0));
  return r * (diff * r);
}

/// Operator norm of i[R(z), A] + R(z) i[H, A] R(z), which vanishes identically.
struct ResolventIdentityReport {
  Complex z;
  double residual = 0.0;
  double lhs_norm = 0.0;
  bool verdict = false;
};

inline ResolventIdentityReport resolvent_commutator_identity(const OperatorSet& s, const Spectra& sp, Complex z,
                                                             double tol = 1e-8) {
  detail::require_nonreal(z, "resolvent_commutator_identity");
  const Matrix r = resolvent(sp.H, z);
  const Matrix lhs = kI * (Matrix(r * s.A) - Matrix(s.A * r));
  const Matrix rhs = -(r * (s.commutator_iHA * r));
  ResolventIdentityReport rep;
  rep.z = z;
  rep.lhs_norm = linalg::operator_norm(lhs);
  rep.residual = linalg::operator_norm(Matrix(lhs - rhs));
  rep.verdict = rep.residual <= tol;
  return rep;
}

struct C1Report {
  Complex z;
  std::size_t n_states = 0;
  std::vector<double> steps;
  /// [step][state] -> ||Q(t) psi||
  std::vector<std::vector<double>> difference_quotient_norms;
  /// per consecutive pair of steps, max over states of ||Q(t_k) psi - Q(t_{k+1}) psi||
  std::vector<double> cauchy_defect;
  /// max over states of ||Q(t_min) psi - i[R, A] psi|| / ||i[R, A] psi||
  double limit_mismatch = 0.0;
  /// same with the Richardson-extrapolated limit of the two smallest steps
  double richardson_mismatch = 0.0;
  double min_decade_ratio = 0.0;
  bool verdict = false;
};

inline std::vector<double> default_c1_steps() { return {1e-2, 1e-3, 1e-4, 1e-5}; }

/// Normalised Gaussian packets centred inside |x| <= L/2 with random centre and momentum.
inline std::vector<Vector> random_interior_states(const Grid& g, std::size_t count, std::uint64_t seed,
                                                  double sigma = 2.0) {
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Vector> out;
  for (std::size_t s = 0; s < count; ++s) {
    const double x0 = (unit() - 0.5) * g.half_length;
    const double k0 = (unit() - 0.5) * 4.0;
    Vector psi(static_cast<Eigen::Index>(g.size));
    for (std::size_t i = 0; i < g.size; ++i) {
      const double d = g.nodes[static_cast<Eigen::Index>(i)] - x0;
      psi[static_cast<Eigen::Index>(i)] = std::exp(Complex(-d * d / (4.0 * sigma * sigma), k0 * g.nodes[static_cast<Eigen::Index>(i)]));
    }
    out.push_back(psi / psi.norm());
  }
  return out;
}

/// Strong differentiability of t -> e^{-itA} R(z) e^{itA} on test states: difference quotients
/// Q(t) psi over a decreasing step ladder must be Cauchy (consecutive differences shrinking by at
/// least `min_ratio` per decade) and land on i[R(z), A] psi.
inline C1Report c1_probe(const OperatorSet& s, const Spectra& sp, const SpectralDecomposition& dec_A, Complex z,
                         const std::vector<Vector>& states, std::vector<double> steps = default_c1_steps(),
                         double tol = 1e-3, double min_ratio = 3.0) {
  detail::require_nonreal(z, "c1_probe");
  if (steps.size() < 2) throw std::invalid_argument("c1_probe: need at least two steps");
  for (std::size_t k = 1; k < steps.size(); ++k)
    if (!(steps[k] < steps[k - 1]) || !(steps[k] > 0.0)) throw std::invalid_argument("c1_probe: steps must be positive and strictly decreasing");
  for (const auto& psi : states)
    if (std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("c1_probe: test states must be normalised");

  auto apply_r = [&](const Vector& v) {
    Vector c = sp.H.to_eigenbasis(v);
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] /= (sp.H.eigenvalues()[k] - z);
    return sp.H.from_eigenbasis(c);
  };

  C1Report rep;
  rep.z = z;
  rep.n_states = states.size();
  rep.steps = steps;
  rep.difference_quotient_norms.assign(steps.size(), std::vector<double>(states.size(), 0.0));
  rep.cauchy_defect.assign(steps.size() - 1, 0.0);
  for (std::size_t st = 0; st < states.size(); ++st) {
    const Vector& psi = states[st];
    const Vector r_psi = apply_r(psi);
    const Vector exact = kI * (apply_r(s.A * psi) - s.A * r_psi);
    std::vector<Vector> q;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const double t = steps[k];
      const Vector conj = propagate(dec_A, apply_r(propagate(dec_A, psi, -t)), t);
      q.push_back((conj - r_psi) / t);
      rep.difference_quotient_norms[k][st] = q.back().norm();
    }
    for (std::size_t k = 0; k + 1 < steps.size(); ++k)
      rep.cauchy_defect[k] = std::max(rep.cauchy_defect[k], (q[k] - q[k + 1]).norm());
    const double scale = std::max(exact.norm(), 1e-300);
    rep.limit_mismatch = std::max(rep.limit_mismatch, (q.back() - exact).norm() / scale);
    const double ratio = steps[steps.size() - 2] / steps.back();
    const Vector extrapolated = (ratio * q.back() - q[q.size() - 2]) / (ratio - 1.0);
    rep.richardson_mismatch = std::max(rep.richardson_mismatch, (extrapolated - exact).norm() / scale);
  }
  rep.min_decade_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < rep.cauchy_defect.size(); ++k) {
    const double decades = std::log10(steps[k] / steps[k + 1]);
    const double r = rep.cauchy_defect[k] / std::max(rep.cauchy_defect[k + 1], 1e-300);
    rep.min_decade_ratio = std::min(rep.min_decade_ratio, std::pow(r, 1.0 / decades));
  }
  rep.verdict = !states.empty() && rep.min_decade_ratio >= min_ratio && rep.limit_mismatch < tol;
  return rep;
}

}  // namespace mourre
