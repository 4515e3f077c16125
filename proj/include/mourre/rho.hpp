#pragma once

// Mourre rho-functions: the closed form for the free channel pair (H0, A0), numerical
// estimators for either pair, the virial check and the transfer inequality
// rho~_H^A >= rho~_{H0}^{A0}.
//
// Both estimators compress i[H, A] onto the spectral subspace selected by the window (or by
// the support of eta) and look at the resulting small Hermitian matrix. The compact remainder
// is modelled by discarding compression eigenmodes that are spatially localised, either in the
// interaction region |x| <= R_K or against the box walls.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mourre/linalg.hpp"
#include "mourre/operators.hpp"
#include "mourre/parallel.hpp"
#include "mourre/spectral.hpp"

namespace mourre {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// rho for (H0, A0): +inf below min(v_-, v_+), 2(lambda - min) up to max(v_-, v_+), 2(lambda - max) from there on.
inline double analytic_rho(double v_minus, double v_plus, double lambda) {
  const double lo = std::min(v_minus, v_plus);
  const double hi = std::max(v_minus, v_plus);
  if (lambda < lo) return kInfinity;
  if (lambda < hi) return 2.0 * (lambda - lo);
  return 2.0 * (lambda - hi);
}

struct DiscardPolicy {
  bool enabled = true;
  double mass_threshold = 0.5;      // theta
  double interaction_radius = 4.0;  // R_K
  double boundary_width = 2.0;      // d_b

  static DiscardPolicy none() {
    DiscardPolicy p;
    p.enabled = false;
    return p;
  }
};

struct ModeDiagnostic {
  double eigenvalue = 0.0;
  double interaction_mass = 0.0;
  double boundary_mass = 0.0;
  bool discarded = false;
};

struct RhoEstimate {
  double lambda = 0.0;
  double eps = 0.0;
  std::string localisation;  // "window" or the eta description
  std::string pair;          // "H,A" or "H0,A0"
  std::string commutator_form;
  double raw_min = kInfinity;
  double corrected = kInfinity;
  int n_discarded = 0;
  Eigen::Index rank = 0;
  bool empty_window = false;
  std::vector<double> compression_spectrum;
  std::vector<ModeDiagnostic> discard_log;
};

enum class PairKind { perturbed, free };

inline std::string to_string(PairKind p) { return p == PairKind::perturbed ? "H,A" : "H0,A0"; }

namespace detail {

/// One Hilbert space worth of (decomposition, commutator, positions).
struct CompressionSpace {
  const SpectralDecomposition* dec;
  SparseMatrix commutator;
  const RealVector* positions;
  double half_length;
};

inline ModeDiagnostic localise(const Vector& mode, const RealVector& x, double half_length,
                               const DiscardPolicy& policy, double eigenvalue) {
  ModeDiagnostic d;
  d.eigenvalue = eigenvalue;
  const double total = mode.squaredNorm();
  if (total == 0.0) return d;
  double inner = 0.0, wall = 0.0;
  for (Eigen::Index i = 0; i < mode.size(); ++i) {
    const double w = std::norm(mode[i]);
    if (std::abs(x[i]) <= policy.interaction_radius) inner += w;
    if (std::abs(x[i]) >= half_length - policy.boundary_width) wall += w;
  }
  d.interaction_mass = inner / total;
  d.boundary_mass = wall / total;
  d.discarded = policy.enabled && (d.interaction_mass >= policy.mass_threshold ||
                                   d.boundary_mass >= policy.mass_threshold);
  return d;
}

/// U_S^dagger C U_S for the selected eigen-indices.
inline Matrix compress(const CompressionSpace& sp, const Matrix& us) {
  const Matrix cu = sp.commutator * us;
  return linalg::symmetrized(Matrix(us.adjoint() * cu));
}

inline RhoEstimate window_estimate(const CompressionSpace& sp, const EnergyWindow& win, const DiscardPolicy& policy) {
  RhoEstimate est;
  est.lambda = win.lambda;
  est.eps = win.eps;
  est.localisation = "window";
  const auto idx = window_indices(*sp.dec, win);
  est.rank = static_cast<Eigen::Index>(idx.size());
  if (idx.empty()) {
    est.empty_window = true;
    return est;
  }
  const Matrix us = sp.dec->columns(idx);
  Eigen::SelfAdjointEigenSolver<Matrix> es(compress(sp, us));
  const Matrix modes = us * es.eigenvectors();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double e = es.eigenvalues()[k];
    est.compression_spectrum.push_back(e);
    ModeDiagnostic d = localise(modes.col(k), *sp.positions, sp.half_length, policy, e);
    est.raw_min = std::min(est.raw_min, e);
    if (d.discarded) {
      ++est.n_discarded;
    } else {
      est.corrected = std::min(est.corrected, e);
    }
    est.discard_log.push_back(d);
  }
  return est;
}

struct EtaCompression {
  Matrix us;        // n x r eigenvectors where eta != 0
  RealVector w;     // eta(lambda_k) on that support
  Matrix weighted;  // W C_r W
};

inline std::optional<EtaCompression> eta_compress(const CompressionSpace& sp, const SmoothingFunction& eta) {
  const RealVector& ev = sp.dec->eigenvalues();
  double peak = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) peak = std::max(peak, std::abs(eta(ev[k])));
  if (peak < 1e-14) return std::nullopt;
  std::vector<Eigen::Index> idx;
  std::vector<double> w;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double v = eta(ev[k]);
    if (std::abs(v) > 1e-14 * peak) {
      idx.push_back(k);
      w.push_back(v);
    }
  }
  EtaCompression c;
  c.us = sp.dec->columns(idx);
  c.w = Eigen::Map<const RealVector>(w.data(), static_cast<Eigen::Index>(w.size()));
  const Vector wc = c.w.cast<Complex>();
  c.weighted = linalg::symmetrized(Matrix(wc.asDiagonal() * compress(sp, c.us) * wc.asDiagonal()));
  return c;
}

struct Feasibility {
  bool feasible = false;
  std::vector<ModeDiagnostic> log;
};

/// Is W C_r W - a W^2 >= 0 on every mode the policy keeps?
inline Feasibility eta_feasible(const CompressionSpace& sp, const EtaCompression& c, double a,
                                const DiscardPolicy& policy, double floor) {
  const Vector w2 = c.w.cwiseAbs2().cast<Complex>();
  Matrix g = c.weighted;
  g.diagonal() -= a * w2;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  Feasibility f;
  f.feasible = true;
  const Matrix modes = c.us * es.eigenvectors();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    ModeDiagnostic d = localise(modes.col(k), *sp.positions, sp.half_length, policy, es.eigenvalues()[k]);
    if (!d.discarded && es.eigenvalues()[k] < -floor) f.feasible = false;
    f.log.push_back(d);
  }
  return f;
}

/// Largest a with eta C eta - a eta^2 >= 0 after discards; +inf when every mode is discarded.
inline double eta_bisect(const CompressionSpace& sp, const EtaCompression& c, const DiscardPolicy& policy,
                         std::vector<ModeDiagnostic>* log) {
  Eigen::SelfAdjointEigenSolver<Matrix> core(compress(sp, c.us), Eigen::EigenvaluesOnly);
  const double floor = 1e-10 * std::max(c.weighted.cwiseAbs().maxCoeff(), 1e-300);
  double lo = core.eigenvalues().minCoeff() - 1.0;
  double hi = core.eigenvalues().maxCoeff() + 1.0;
  Feasibility top = eta_feasible(sp, c, hi, policy, floor);
  if (top.feasible) {
    if (log) *log = std::move(top.log);
    return kInfinity;
  }
  while (hi - lo > 1e-3 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (eta_feasible(sp, c, mid, policy, floor).feasible) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (log) *log = eta_feasible(sp, c, lo, policy, floor).log;
  return lo;
}

inline RhoEstimate eta_estimate(const CompressionSpace& sp, const SmoothingFunction& eta, const DiscardPolicy& policy) {
  RhoEstimate est;
  est.lambda = eta.center;
  est.eps = eta.width;
  est.localisation = eta.description;
  const auto c = eta_compress(sp, eta);
  if (!c) {
    est.empty_window = true;
    return est;
  }
  est.rank = c->us.cols();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c->weighted, Eigen::EigenvaluesOnly);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) est.compression_spectrum.push_back(es.eigenvalues()[k]);
  est.raw_min = eta_bisect(sp, *c, DiscardPolicy::none(), nullptr);
  est.corrected = std::max(est.raw_min, eta_bisect(sp, *c, policy, &est.discard_log));
  est.n_discarded = static_cast<int>(
      std::count_if(est.discard_log.begin(), est.discard_log.end(), [](const ModeDiagnostic& d) { return d.discarded; }));
  return est;
}

/// Channel-wise results of the block-diagonal free pair merged into one estimate.
inline RhoEstimate merge_channels(RhoEstimate m, const RhoEstimate& p) {
  m.raw_min = std::min(m.raw_min, p.raw_min);
  m.corrected = std::min(m.corrected, p.corrected);
  m.n_discarded += p.n_discarded;
  m.rank += p.rank;
  m.empty_window = m.empty_window && p.empty_window;
  m.compression_spectrum.insert(m.compression_spectrum.end(), p.compression_spectrum.begin(),
                                p.compression_spectrum.end());
  std::sort(m.compression_spectrum.begin(), m.compression_spectrum.end());
  m.discard_log.insert(m.discard_log.end(), p.discard_log.begin(), p.discard_log.end());
  return m;
}

template <class Estimator>
RhoEstimate estimate_pair(const OperatorSet& set, const Spectra& sp, PairKind pair, CommutatorForm form,
                          Estimator&& estimator) {
  RhoEstimate est;
  if (pair == PairKind::perturbed) {
    est = estimator(CompressionSpace{&sp.H, set.commutator(form), &set.grid.nodes, set.grid.half_length});
  } else {
    const BlockDiagonal c0 = set.commutator0(form);
    est = merge_channels(
        estimator(CompressionSpace{&sp.H0_minus, c0.minus, &set.grid.nodes, set.grid.half_length}),
        estimator(CompressionSpace{&sp.H0_plus, c0.plus, &set.grid.nodes, set.grid.half_length}));
  }
  est.pair = to_string(pair);
  est.commutator_form = to_string(form);
  return est;
}

}  // namespace detail

/// Sharp-window estimate: spectrum of E i[H,A] E restricted to Ran E(lambda; eps).
/// An empty window gives raw_min = corrected = +inf with empty_window set.
inline RhoEstimate estimate_rho_window(const OperatorSet& set, const Spectra& sp, PairKind pair,
                                       const EnergyWindow& win, const DiscardPolicy& policy = {},
                                       CommutatorForm form = CommutatorForm::open_boundary) {
  return detail::estimate_pair(set, sp, pair, form, [&](const detail::CompressionSpace& s) {
    return detail::window_estimate(s, win, policy);
  });
}

/// eta-form estimate: the largest a with eta(H) i[H,A] eta(H) - a eta(H)^2 >= 0 modulo the
/// discarded modes, found by bisection to 1e-3 max(1, |a|).
inline RhoEstimate estimate_rho_eta(const OperatorSet& set, const Spectra& sp, PairKind pair,
                                    const SmoothingFunction& eta, const DiscardPolicy& policy = {},
                                    CommutatorForm form = CommutatorForm::open_boundary) {
  RhoEstimate est = detail::estimate_pair(set, sp, pair, form, [&](const detail::CompressionSpace& s) {
    return detail::eta_estimate(s, eta, policy);
  });
  if (est.empty_window) throw std::domain_error("estimate_rho_eta: eta(H) is numerically zero");
  return est;
}

/// |<u_k, i[H,A] u_k>| / ||i[H,A]|| with the exact (Dirichlet box) commutator.
inline double virial_defect(const OperatorSet& set, const Spectra& sp, Eigen::Index k,
                            std::optional<double> commutator_norm = std::nullopt) {
  const double nrm = commutator_norm ? *commutator_norm : linalg::hermitian_norm(set.commutator_iHA);
  const Vector u = sp.H.vector(k);
  return std::abs(u.dot(set.commutator_iHA * u)) / nrm;
}

/// |<u_k, i[H,A] u_l>| / ||i[H,A]||; equals |lambda_k - lambda_l| |<u_k, A u_l>| / ||i[H,A]|| exactly.
inline double virial_offdiagonal(const OperatorSet& set, const Spectra& sp, Eigen::Index k, Eigen::Index l,
                                 std::optional<double> commutator_norm = std::nullopt) {
  const double nrm = commutator_norm ? *commutator_norm : linalg::hermitian_norm(set.commutator_iHA);
  return std::abs(sp.H.vector(k).dot(set.commutator_iHA * sp.H.vector(l))) / nrm;
}

struct TransferSample {
  double lambda = 0.0;
  double rho0_analytic = 0.0;
  RhoEstimate rho_H;
  double margin = 0.0;
};

struct TransferReport {
  std::vector<TransferSample> samples;
  std::vector<double> excluded;  // too close to a threshold
  double eps = 0.0;
  double tolerance = 0.0;
  /// || eta(H) i[A,H] eta(H) - J eta(H0) i[A0,H0] eta(H0) J* || on interior nodes, per sample.
  std::vector<double> eone_residual_norm;
  std::vector<std::vector<double>> eone_singular_values;
  bool verdict = false;
};

namespace detail {

/// eta(M) C eta(M) = U_S (W C_r W) U_S^dagger as (U_S, core).
inline std::pair<Matrix, Matrix> low_rank_sandwich(const SpectralDecomposition& dec, const SparseMatrix& c,
                                                   const SmoothingFunction& eta) {
  CompressionSpace sp{&dec, c, nullptr, 0.0};
  auto ec = eta_compress(sp, eta);
  if (!ec) return {Matrix(dec.dim(), 0), Matrix(0, 0)};
  return {std::move(ec->us), std::move(ec->weighted)};
}

/// Singular values of the interior restriction of
///   eta(H) C eta(H) - sum_c j_c eta(H_c) C0_c eta(H_c) j_c.
inline std::vector<double> eone_residual(const OperatorSet& set, const Spectra& sp, const SmoothingFunction& eta,
                                         double boundary_width, std::size_t keep) {
  const BlockDiagonal c0 = set.commutator0(CommutatorForm::open_boundary);
  auto [uh, kh] = low_rank_sandwich(sp.H, set.commutator(CommutatorForm::open_boundary), eta);
  auto [um, km] = low_rank_sandwich(sp.H0_minus, c0.minus, eta);
  auto [up, kp] = low_rank_sandwich(sp.H0_plus, c0.plus, eta);
  um = set.cutoffs.j_minus.cast<Complex>().asDiagonal() * um;
  up = set.cutoffs.j_plus.cast<Complex>().asDiagonal() * up;

  const Eigen::Index n = set.dim();
  const Eigen::Index rank = uh.cols() + um.cols() + up.cols();
  if (rank == 0) return std::vector<double>(keep, 0.0);
  Matrix q(n, rank);
  q << uh, um, up;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(set.grid.nodes[i]) > set.grid.half_length - boundary_width) q.row(i).setZero();
  Matrix core = Matrix::Zero(rank, rank);
  core.block(0, 0, uh.cols(), uh.cols()) = kh;
  core.block(uh.cols(), uh.cols(), um.cols(), um.cols()) = -km;
  core.block(uh.cols() + um.cols(), uh.cols() + um.cols(), up.cols(), up.cols()) = -kp;
  // Q K Q^dagger = Qo (R K R^dagger) Qo^dagger with Q = Qo R.
  Eigen::HouseholderQR<Matrix> qr(q);
  const Matrix r = qr.matrixQR().topRows(std::min(n, rank)).triangularView<Eigen::Upper>();
  const Matrix small = linalg::symmetrized(Matrix(r * core * r.adjoint()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(small, Eigen::EigenvaluesOnly);
  std::vector<double> s(static_cast<std::size_t>(es.eigenvalues().size()));
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) s[static_cast<std::size_t>(k)] = std::abs(es.eigenvalues()[k]);
  std::sort(s.begin(), s.end(), std::greater<>());
  s.resize(keep, 0.0);
  return s;
}

}  // namespace detail

/// Checks rho~_H^A(lambda) >= rho_{H0}^{A0}(lambda) - tol at every sample at least 2 eps away
/// from the thresholds v_-, v_+.
inline TransferReport transfer_verify(const OperatorSet& set, const Spectra& sp, const std::vector<double>& lambdas,
                                      double eps, double tol, const DiscardPolicy& policy = {},
                                      unsigned threads = 1) {
  TransferReport rep;
  rep.eps = eps;
  rep.tolerance = tol;
  std::vector<double> kept;
  for (double l : lambdas) {
    if (std::abs(l - set.potential.v_minus) < 2.0 * eps || std::abs(l - set.potential.v_plus) < 2.0 * eps) {
      rep.excluded.push_back(l);
    } else {
      kept.push_back(l);
    }
  }
  struct Row {
    TransferSample sample;
    std::vector<double> eone;
  };
  auto rows = parallel_map(kept.size(), threads, [&](std::size_t i) {
    Row row;
    const double l = kept[i];
    const auto eta = SmoothingFunction::bump(l, eps);
    row.sample.lambda = l;
    row.sample.rho0_analytic = analytic_rho(set.potential.v_minus, set.potential.v_plus, l);
    row.sample.rho_H = estimate_rho_eta(set, sp, PairKind::perturbed, eta, policy);
    const double est = row.sample.rho_H.corrected;
    const double ref = row.sample.rho0_analytic;
    if (std::isinf(ref)) {
      row.sample.margin = std::isinf(est) ? kInfinity : -kInfinity;
    } else {
      row.sample.margin = est - ref;
    }
    row.eone = detail::eone_residual(set, sp, eta, policy.boundary_width, 20);
    return row;
  });
  rep.verdict = !rows.empty();
  for (auto& r : rows) {
    rep.verdict = rep.verdict && r.sample.margin >= -tol;
    rep.eone_residual_norm.push_back(r.eone.front());
    rep.eone_singular_values.push_back(std::move(r.eone));
    rep.samples.push_back(std::move(r.sample));
  }
  return rep;
}

}  // namespace mourre
