#pragma once

// Time-dependent scattering on the box: finite-time approximants of the wave operators
// W_+-(H, H0, J) = s-lim e^{itH} J e^{-itH0} P0, the completeness conditions with J~ = J*,
// and reflection/transmission probabilities checked against plane-wave matching.
//
// The strong limits become "stabilised before the packet feels the walls": every probe carries
// a Cauchy ladder and a boundary margin, and times where a lump of the packet sits within five
// standard deviations of +-L are not admissible.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "mourre/grid.hpp"
#include "mourre/linalg.hpp"
#include "mourre/operators.hpp"
#include "mourre/spectral.hpp"

namespace mourre {

enum class Direction { outgoing, incoming };  // W_+ (t -> +inf) and W_- (t -> -inf)

inline std::string to_string(Direction d) { return d == Direction::outgoing ? "+" : "-"; }
inline std::string to_string(Channel c) { return c == Channel::minus ? "-" : "+"; }

inline Direction direction_from_string(const std::string& s) {
  if (s == "+" || s == "plus" || s == "outgoing") return Direction::outgoing;
  if (s == "-" || s == "minus" || s == "incoming") return Direction::incoming;
  throw std::invalid_argument("unknown direction '" + s + "' (expected + or -)");
}

inline Channel channel_from_string(const std::string& s) {
  if (s == "-" || s == "minus") return Channel::minus;
  if (s == "+" || s == "plus") return Channel::plus;
  throw std::invalid_argument("unknown channel '" + s + "' (expected - or +)");
}

struct PacketParams {
  Channel channel = Channel::minus;
  double x0 = -25.0;
  double k0 = 1.0;
  double sigma = 3.0;
};

/// exp(i k0 x) exp(-(x - x0)^2 / (4 sigma^2)) normalised, on the grid.
inline Vector gaussian_packet(const Grid& g, double x0, double k0, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_packet: sigma must be positive");
  Vector psi(g.nodes.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double d = g.nodes[i] - x0;
    psi[i] = std::exp(Complex(-d * d / (4.0 * sigma * sigma), k0 * g.nodes[i]));
  }
  return psi / psi.norm();
}

/// Gaussian packet in one component of H0, zero in the other.
inline TwoSpaceState make_channel_packet(const Grid& g, const PacketParams& p) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("make_channel_packet: sigma must be positive");
  if (!(std::abs(p.x0) + 5.0 * p.sigma <= g.half_length)) {
    throw std::invalid_argument("make_channel_packet: |x0| + 5 sigma must not exceed L");
  }
  if (p.channel == Channel::minus && !(p.x0 < -4.0)) {
    throw std::invalid_argument("make_channel_packet: channel - packets must start at x0 < -4");
  }
  if (p.channel == Channel::plus && !(p.x0 > 4.0)) {
    throw std::invalid_argument("make_channel_packet: channel + packets must start at x0 > 4");
  }
  if (p.k0 == 0.0) throw std::invalid_argument("make_channel_packet: k0 must be nonzero");
  const Vector psi = gaussian_packet(g, p.x0, p.k0, p.sigma);
  const Vector zero = Vector::Zero(psi.size());
  return p.channel == Channel::minus ? TwoSpaceState{psi, zero} : TwoSpaceState{zero, psi};
}

/// <psi, P psi> with the centred-difference momentum.
inline double mean_momentum(const Grid& g, const Vector& psi) {
  const SparseMatrix p = build_momentum(g);
  return (psi.dot(p * psi)).real() / psi.squaredNorm();
}

/// Split of a field into its positive- and negative-momentum parts (DFT on a zero-padded box).
struct MomentumSplit {
  Vector positive;
  Vector negative;
};

inline MomentumSplit momentum_split(const Vector& psi) {
  const Eigen::Index n = psi.size();
  const auto m = static_cast<std::size_t>(2 * n);
  std::vector<Complex> in(m, Complex(0.0, 0.0)), spec, back;
  for (Eigen::Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = psi[i];
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  std::vector<Complex> pos(m, Complex(0.0, 0.0)), neg(m, Complex(0.0, 0.0));
  for (std::size_t k = 1; k < m; ++k) {
    if (k < m / 2) {
      pos[k] = spec[k];
    } else if (k > m / 2) {
      neg[k] = spec[k];
    }
  }
  // Zero and Nyquist modes carry no direction; split them evenly.
  pos[0] = neg[0] = 0.5 * spec[0];
  pos[m / 2] = neg[m / 2] = 0.5 * spec[m / 2];
  MomentumSplit out{Vector(n), Vector(n)};
  fft.inv(back, pos);
  for (Eigen::Index i = 0; i < n; ++i) out.positive[i] = back[static_cast<std::size_t>(i)];
  fft.inv(back, neg);
  for (Eigen::Index i = 0; i < n; ++i) out.negative[i] = back[static_cast<std::size_t>(i)];
  return out;
}

/// P0^+- for this model: the part of each channel that runs away from the junction in the
/// direction of time. For W_+ channel - keeps k < 0 and channel + keeps k > 0; W_- is the mirror.
inline TwoSpaceState initial_set_projection(const TwoSpaceState& phi, Direction d) {
  const MomentumSplit m = momentum_split(phi.phi_minus);
  const MomentumSplit p = momentum_split(phi.phi_plus);
  if (d == Direction::outgoing) return {m.negative, p.positive};
  return {m.positive, p.negative};
}

/// Free evolution in H0 = H0_- (+) H0_+.
inline TwoSpaceState propagate_free(const Spectra& sp, const TwoSpaceState& phi, double t) {
  return {propagate(sp.H0_minus, phi.phi_minus, t), propagate(sp.H0_plus, phi.phi_plus, t)};
}

/// Lumps of a density split at x = 0; each lump with mass above `min_mass` of the total must keep
/// its centroid at least `k_std` standard deviations away from the walls.
struct BoundaryMargin {
  double margin = std::numeric_limits<double>::infinity();  // min over lumps of L - |centroid|
  double spread = 0.0;                                       // std of that lump
  bool admissible = true;
};

inline BoundaryMargin boundary_margin(const Grid& g, const RealVector& density, double k_std = 5.0,
                                      double min_mass = 1e-3) {
  BoundaryMargin out;
  const double total = density.sum();
  if (total <= 0.0) return out;
  for (int side : {-1, 1}) {
    double mass = 0.0, first = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < density.size(); ++i) {
      const double x = g.nodes[i];
      if ((side < 0 && x < 0.0) || (side > 0 && x > 0.0) || x == 0.0) {
        const double w = x == 0.0 ? 0.5 * density[i] : density[i];
        mass += w;
        first += w * x;
        second += w * x * x;
      }
    }
    if (mass < min_mass * total) continue;
    const double c = first / mass;
    const double sd = std::sqrt(std::max(0.0, second / mass - c * c));
    const double margin = g.half_length - std::abs(c);
    if (margin < out.margin) {
      out.margin = margin;
      out.spread = sd;
    }
    if (margin < k_std * sd) out.admissible = false;
  }
  return out;
}

inline RealVector density(const Vector& psi) { return psi.cwiseAbs2(); }
inline RealVector density(const TwoSpaceState& s) { return s.phi_minus.cwiseAbs2() + s.phi_plus.cwiseAbs2(); }

struct WaveProbeReport {
  Direction direction = Direction::outgoing;
  Channel channel = Channel::minus;
  std::vector<double> times;             // signed
  std::vector<bool> admissible;
  std::vector<double> boundary_margin;
  std::vector<double> ladder;            // ||psi_W(t_{k+1}) - psi_W(t_k)||, admissible neighbours only (else NaN)
  std::vector<double> defect;            // ||e^{-itH} psi_W - J e^{-itH0} phi||
  double best_time = 0.0;
  double p0_norm = 0.0;                  // ||P0 phi||
  double image_norm = 0.0;               // ||psi_W||
  double isometry_ratio = 0.0;
  Vector image;                          // psi_W
};

namespace detail {

inline void require_direction_consistent(const TwoSpaceState& phi, const Grid& g, Direction d) {
  for (Channel c : {Channel::minus, Channel::plus}) {
    const Vector& comp = c == Channel::minus ? phi.phi_minus : phi.phi_plus;
    if (comp.squaredNorm() < 1e-12) continue;
    const double k = mean_momentum(g, comp);
    const bool away_from_junction = c == Channel::minus ? k < 0.0 : k > 0.0;
    const bool ok = d == Direction::outgoing ? away_from_junction : !away_from_junction;
    if (!ok) {
      throw std::invalid_argument("wave_operator_probe: channel " + to_string(c) + " packet with mean momentum " +
                                  std::to_string(k) + " does not match direction " + to_string(d));
    }
  }
}

}  // namespace detail

/// psi_W(t) = e^{itH} J e^{-itH0} phi at t = +-|t| for each entry of `times` (taken as magnitudes,
/// ascending). psi_W is the value at the admissible time with the smallest ladder step.
inline WaveProbeReport wave_operator_probe(const OperatorSet& s, const Spectra& sp, const TwoSpaceState& phi,
                                           Direction d, const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("wave_operator_probe: empty time list");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1]))) {
      throw std::invalid_argument("wave_operator_probe: times must be nonnegative magnitudes in ascending order");
    }
  }
  detail::require_direction_consistent(phi, s.grid, d);
  const double sign = d == Direction::outgoing ? 1.0 : -1.0;

  WaveProbeReport rep;
  rep.direction = d;
  rep.channel = phi.phi_minus.squaredNorm() >= phi.phi_plus.squaredNorm() ? Channel::minus : Channel::plus;
  std::vector<Vector> images, glued;
  for (double tm : times) {
    const double t = sign * tm;
    const TwoSpaceState free = propagate_free(sp, phi, t);
    const Vector j_free = s.J.apply(free);
    const BoundaryMargin bm = boundary_margin(s.grid, density(free));
    rep.times.push_back(t);
    rep.admissible.push_back(bm.admissible);
    rep.boundary_margin.push_back(bm.margin);
    glued.push_back(j_free);
    images.push_back(propagate(sp.H, j_free, -t));
  }
  const std::size_t m = times.size();
  std::optional<std::size_t> best;
  double best_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (rep.admissible[k] && rep.admissible[k + 1]) {
      const double step = (images[k + 1] - images[k]).norm();
      rep.ladder.push_back(step);
      if (step < best_step) {
        best_step = step;
        best = k + 1;
      }
    } else {
      rep.ladder.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (!best) {
    for (std::size_t k = 0; k < m; ++k)
      if (rep.admissible[k]) best = k;
  }
  if (!best) {
    throw std::runtime_error(
        "wave_operator_probe: no admissible time; the packet reaches the box walls before J e^{-itH0} phi "
        "stabilises (increase L)");
  }
  rep.best_time = rep.times[*best];
  rep.image = images[*best];
  for (std::size_t k = 0; k < m; ++k)
    rep.defect.push_back((propagate(sp.H, rep.image, rep.times[k]) - glued[k]).norm());
  rep.p0_norm = initial_set_projection(phi, d).norm();
  rep.image_norm = rep.image.norm();
  rep.isometry_ratio = rep.p0_norm > 0.0 ? rep.image_norm / rep.p0_norm : 0.0;
  return rep;
}

struct CompletenessReport {
  Direction direction = Direction::outgoing;
  std::vector<double> times;
  std::vector<bool> admissible;
  std::vector<double> boundary_margin;
  std::vector<double> froufrou_norms;  // ||(J J~ - 1) e^{-itH} psi||
  std::vector<double> converse_norms;  // ||(J~ J - 1) e^{-itH0} P0 J~ psi||
  double scattering_threshold = 0.0;   // eigenvalues above this span the scattering surrogate
  double range_defect = 0.0;           // ||(1 - P_scatter) psi_W|| / ||psi_W||
  double chain_rule_defect = 0.0;
  double last_admissible_time = std::numeric_limits<double>::quiet_NaN();
  double decay_threshold = 0.05;
  bool verdict = false;
};

namespace detail {

/// ||(1 - P) psi|| / ||psi|| for P the spectral projection of H onto (threshold, inf).
inline double scattering_complement(const SpectralDecomposition& dec, const Vector& psi, double threshold) {
  const Vector c = dec.to_eigenbasis(psi);
  double below = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (dec.eigenvalues()[k] <= threshold) below += std::norm(c[k]);
  const double total = c.squaredNorm();
  return total > 0.0 ? std::sqrt(below / total) : 0.0;
}

inline TwoSpaceState converse_defect(const Identification& j, const TwoSpaceState& phi) {
  const TwoSpaceState back = j.adjoint_apply(j.apply(phi));
  return {back.phi_minus - phi.phi_minus, back.phi_plus - phi.phi_plus};
}

}  // namespace detail

/// The two decay conditions with J~ = J*, along the admissible time window.
/// `times` are magnitudes; the direction fixes their sign and the initial-set projection.
inline CompletenessReport completeness_probe(const OperatorSet& s, const Spectra& sp, const Vector& psi, Direction d,
                                             const std::vector<double>& times, double delta = 0.01,
                                             double decay_threshold = 0.05) {
  if (times.empty()) throw std::invalid_argument("completeness_probe: empty time list");
  if (psi.size() != s.dim()) throw std::invalid_argument("completeness_probe: state dimension mismatch");
  const double sign = d == Direction::outgoing ? 1.0 : -1.0;
  const RealVector defect_mult = s.cutoffs.jj_sum_sq.array() - 1.0;
  const TwoSpaceState phi = initial_set_projection(s.J.adjoint_apply(psi), d);

  CompletenessReport rep;
  rep.direction = d;
  rep.decay_threshold = decay_threshold;
  rep.scattering_threshold = std::min(s.potential.v_minus, s.potential.v_plus) + delta;
  std::optional<std::size_t> last;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = sign * times[k];
    const Vector evolved = propagate(sp.H, psi, t);
    const TwoSpaceState free = propagate_free(sp, phi, t);
    const BoundaryMargin bm = boundary_margin(s.grid, density(evolved));
    const BoundaryMargin bm0 = boundary_margin(s.grid, density(free));
    rep.times.push_back(t);
    rep.admissible.push_back(bm.admissible && bm0.admissible);
    rep.boundary_margin.push_back(std::min(bm.margin, bm0.margin));
    rep.froufrou_norms.push_back(defect_mult.cast<Complex>().cwiseProduct(evolved).norm());
    rep.converse_norms.push_back(detail::converse_defect(s.J, free).norm());
    if (rep.admissible.back()) last = k;
  }
  if (!last) {
    throw std::runtime_error("completeness_probe: no admissible time; the state reaches the box walls (increase L)");
  }
  const double t_last = rep.times[*last];
  rep.last_admissible_time = t_last;

  // Image of W at the last admissible time and its overlap with the non-scattering spectrum.
  const Vector image = propagate(sp.H, s.J.apply(propagate_free(sp, phi, t_last)), -t_last);
  rep.range_defect = detail::scattering_complement(sp.H, image, rep.scattering_threshold);

  // W(H, H0, J; t1) W(H0, H, J~; t2) psi against W(H, H, J J~; t1) psi at two different times.
  const double t_mid = rep.times[*last / 2];
  const TwoSpaceState back = s.J.adjoint_apply(propagate(sp.H, psi, t_mid));
  const Vector inner = s.J.apply(propagate_free(sp, propagate_free(sp, back, -t_mid), t_last));
  const Vector composed = propagate(sp.H, inner, -t_last);
  const Vector direct = propagate(
      sp.H, s.cutoffs.jj_sum_sq.cast<Complex>().cwiseProduct(propagate(sp.H, psi, t_last)), -t_last);
  rep.chain_rule_defect = (composed - direct).norm() / psi.norm();

  rep.verdict = rep.froufrou_norms[*last] < decay_threshold && rep.converse_norms[*last] < decay_threshold;
  return rep;
}

struct ScatteringCoefficients {
  double energy = 0.0;
  double reflection = 0.0;
  double transmission = 0.0;
  double flux_defect = 0.0;
  double time = std::numeric_limits<double>::quiet_NaN();
  double interaction_mass = 0.0;
};

/// Plane-wave matching at a sharp step: R = ((k - k')/(k + k'))^2, T = 4kk'/(k + k')^2.
inline ScatteringCoefficients sharp_step_oracle(double lambda, double v_minus, double v_plus) {
  if (!(lambda > std::max(v_minus, v_plus))) {
    throw std::domain_error("sharp_step_oracle: closed channel (lambda <= max(v_-, v_+))");
  }
  const double k = std::sqrt(lambda - v_minus);
  const double kp = std::sqrt(lambda - v_plus);
  ScatteringCoefficients c;
  c.energy = lambda;
  c.reflection = std::pow((k - kp) / (k + kp), 2);
  c.transmission = 4.0 * k * kp / std::pow(k + kp, 2);
  c.flux_defect = std::abs(c.reflection + c.transmission - 1.0);
  return c;
}

/// The oracle averaged over the momentum density |phi^(k)|^2 ~ exp(-2 sigma^2 (k - k0)^2) of a
/// channel - Gaussian packet; momenta whose energy lies below v_+ reflect totally.
inline ScatteringCoefficients averaged_step_oracle(double k0, double sigma, double v_minus, double v_plus,
                                                   int samples = 4001) {
  const double half = 8.0 / (2.0 * sigma);
  const double h = 2.0 * half / (samples - 1);
  double wsum = 0.0, rsum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double k = k0 - half + i * h;
    const double w = std::exp(-2.0 * sigma * sigma * (k - k0) * (k - k0)) * ((i == 0 || i == samples - 1) ? 0.5 : 1.0);
    const double lambda = k * k + v_minus;
    const double r = lambda > v_plus ? sharp_step_oracle(lambda, v_minus, v_plus).reflection : 1.0;
    wsum += w;
    rsum += w * r;
  }
  ScatteringCoefficients c;
  c.energy = k0 * k0 + v_minus;
  c.reflection = rsum / wsum;
  c.transmission = 1.0 - c.reflection;
  return c;
}

struct ScatteringRun {
  double x0 = -25.0;
  double sigma = 3.0;
  double time_step = 1.0;
  double max_time = 200.0;
  double interaction_radius = 4.0;
  double separation_mass = 1e-2;
};

/// Energy spread of the packet: 2 k0 times the momentum standard deviation 1/(2 sigma).
inline double packet_energy_width(double k0, double sigma) { return 2.0 * std::abs(k0) / (2.0 * sigma); }

/// Launches an incoming channel - packet at energy lambda and measures the probabilities found
/// in each channel once the scattered lumps have left |x| <= R. Probabilities are norms, so the
/// flux factor k'/k is already accounted for.
inline ScatteringCoefficients scattering_coefficients(const OperatorSet& s, const Spectra& sp, double lambda,
                                                      const ScatteringRun& run = {}) {
  const double vm = s.potential.v_minus;
  const double vp = s.potential.v_plus;
  if (!(lambda > vm)) throw std::domain_error("scattering_coefficients: closed channel (lambda <= v_-)");
  const double k0 = std::sqrt(lambda - vm);
  const double width = packet_energy_width(k0, run.sigma);
  if (!(lambda > std::max(vm, vp) + width)) {
    throw std::domain_error("scattering_coefficients: closed channel (lambda=" + std::to_string(lambda) +
                            " must exceed max(v_-, v_+) + energy width " + std::to_string(std::max(vm, vp) + width) +
                            ")");
  }
  const TwoSpaceState phi = make_channel_packet(s.grid, {Channel::minus, run.x0, k0, run.sigma});
  const Vector psi0 = s.J.apply(phi);
  const Vector c0 = sp.H.to_eigenbasis(psi0);
  const RealVector& ev = sp.H.eigenvalues();

  std::optional<ScatteringCoefficients> best;
  for (double t = 0.0; t <= run.max_time; t += run.time_step) {
    Vector c = c0;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(Complex(0.0, -t * ev[k]));
    const Vector psi = sp.H.from_eigenbasis(c);
    const RealVector rho = density(psi);
    if (!boundary_margin(s.grid, rho).admissible) break;
    double inner = 0.0;
    for (Eigen::Index i = 0; i < rho.size(); ++i)
      if (std::abs(s.grid.nodes[i]) <= run.interaction_radius) inner += rho[i];
    if (t < std::abs(run.x0) / (2.0 * k0) || inner >= run.separation_mass) continue;
    ScatteringCoefficients c1;
    c1.energy = lambda;
    c1.time = t;
    c1.interaction_mass = inner;
    c1.reflection = s.cutoffs.j_minus.cwiseAbs2().dot(rho);
    c1.transmission = s.cutoffs.j_plus.cwiseAbs2().dot(rho);
    c1.flux_defect = std::abs(c1.reflection + c1.transmission - 1.0);
    best = c1;
  }
  if (!best) {
    throw std::runtime_error(
        "scattering_coefficients: reflected and transmitted parts do not separate before the box walls "
        "(increase L or reduce |x0|)");
  }
  return *best;
}

}  // namespace mourre
