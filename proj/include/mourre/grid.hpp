#pragma once

// Uniform grid on [-L, L], smooth cutoffs j_-/j_+, steplike potentials and the
// tail diagnostics for the short-range (|x|(v - v_+-) -> 0) and long-range
// (|x| v'(x) -> 0) conditions.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mourre/linalg.hpp"

namespace mourre {

using Field = RealVector;

struct Grid {
  double half_length = 0.0;
  std::size_t size = 0;
  double spacing = 0.0;
  RealVector nodes;

  [[nodiscard]] double x(std::size_t i) const { return nodes[static_cast<Eigen::Index>(i)]; }
  /// Index of the node mirrored through x = 0.
  [[nodiscard]] std::size_t mirror(std::size_t i) const { return size - 1 - i; }
};

/// Odd node count keeps x = 0 on the grid and makes the reflection x -> -x exact.
inline Grid make_grid(double half_length, std::size_t n) {
  if (!(half_length > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
  if (n < 16) throw std::invalid_argument("make_grid: n must be at least 16");
  if (n % 2 == 0) throw std::invalid_argument("make_grid: n must be odd so that x=0 is a node");
  Grid g;
  g.half_length = half_length;
  g.size = n;
  const auto half = static_cast<long>((n - 1) / 2);
  g.spacing = 2.0 * half_length / static_cast<double>(n - 1);
  g.nodes.resize(static_cast<Eigen::Index>(n));
  for (long i = 0; i < static_cast<long>(n); ++i) {
    g.nodes[i] = static_cast<double>(i - half) * g.spacing;
  }
  g.nodes[0] = -half_length;
  g.nodes[static_cast<Eigen::Index>(n - 1)] = half_length;
  return g;
}

namespace smooth {

/// exp(-1/t) for t > 0, else 0.
inline double mollifier_tail(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double mollifier_tail_derivative(double t) {
  return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
}

/// C^infinity transition: 0 for u <= 0, 1 for u >= 1.
inline double transition(double u) {
  const double a = mollifier_tail(u);
  const double b = mollifier_tail(1.0 - u);
  return a / (a + b);
}

inline double transition_derivative(double u) {
  const double a = mollifier_tail(u);
  const double b = mollifier_tail(1.0 - u);
  const double s = a + b;
  return (mollifier_tail_derivative(u) * b + a * mollifier_tail_derivative(1.0 - u)) / (s * s);
}

/// exp(1 - 1/(1 - u^2)) on |u| < 1: C_c^infinity, peak value 1 at u = 0.
inline double bump(double u) {
  const double q = 1.0 - u * u;
  return q > 0.0 ? std::exp(1.0 - 1.0 / q) : 0.0;
}

inline double bump_derivative(double u) {
  const double q = 1.0 - u * u;
  return q > 0.0 ? bump(u) * (-2.0 * u) / (q * q) : 0.0;
}

}  // namespace smooth

/// j_+ with j_+ = 0 on (-inf, 1] and j_+ = 1 on [2, inf).
inline double cutoff_plus(double x) { return smooth::transition(x - 1.0); }

struct CutoffPair {
  Field j_minus;
  Field j_plus;
  Field j;           // j_minus + j_plus
  Field jj_sum_sq;   // j_minus^2 + j_plus^2
  std::string kind;
};

namespace detail {
inline CutoffPair assemble_cutoffs(Field jm, Field jp, std::string kind) {
  CutoffPair c;
  c.j = jm + jp;
  c.jj_sum_sq = jm.cwiseAbs2() + jp.cwiseAbs2();
  c.j_minus = std::move(jm);
  c.j_plus = std::move(jp);
  c.kind = std::move(kind);
  return c;
}
}  // namespace detail

inline CutoffPair make_cutoffs(const Grid& grid) {
  if (grid.half_length < 4.0) {
    throw std::domain_error("make_cutoffs: domain too small (need L >= 4 for the [1,2] transition)");
  }
  const auto n = static_cast<Eigen::Index>(grid.size);
  Field jp(n), jm(n);
  for (Eigen::Index i = 0; i < n; ++i) jp[i] = cutoff_plus(grid.nodes[i]);
  for (Eigen::Index i = 0; i < n; ++i) jm[i] = jp[n - 1 - i];
  return detail::assemble_cutoffs(std::move(jm), std::move(jp), "mollifier");
}

/// Variant cutoffs with j_-^2 + j_+^2 == 1 everywhere: j_+ = sin(pi/2 s), j_- = cos(pi/2 s),
/// s the smooth transition over [-1, 1]. Makes JJ* the identity.
inline CutoffPair make_partition_of_unity_squares(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  Field jp(n), jm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = 0.5 * M_PI * smooth::transition(0.5 * (grid.nodes[i] + 1.0));
    jp[i] = std::sin(theta);
  }
  for (Eigen::Index i = 0; i < n; ++i) jm[i] = jp[n - 1 - i];
  return detail::assemble_cutoffs(std::move(jm), std::move(jp), "squares_sum_to_one");
}

/// Variant cutoffs with j_- + j_+ == 1 (so A = D): j_+ = s, j_- = 1 - s over [-1, 1].
inline CutoffPair make_partition_of_unity(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  Field jp(n), jm(n);
  for (Eigen::Index i = 0; i < n; ++i) jp[i] = smooth::transition(0.5 * (grid.nodes[i] + 1.0));
  for (Eigen::Index i = 0; i < n; ++i) jm[i] = jp[n - 1 - i];
  return detail::assemble_cutoffs(std::move(jm), std::move(jp), "sum_to_one");
}

/// Arbitrary sampled cutoffs; only the range [0, 1] is enforced.
inline CutoffPair make_cutoffs_from_samples(const Grid& grid, Field j_minus, Field j_plus) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  if (j_minus.size() != n || j_plus.size() != n) {
    throw std::invalid_argument("make_cutoffs_from_samples: sample length does not match grid");
  }
  if (j_minus.minCoeff() < 0.0 || j_plus.minCoeff() < 0.0 || j_minus.maxCoeff() > 1.0 ||
      j_plus.maxCoeff() > 1.0) {
    throw std::invalid_argument("make_cutoffs_from_samples: cutoff values must lie in [0,1]");
  }
  return detail::assemble_cutoffs(std::move(j_minus), std::move(j_plus), "custom");
}

enum class ProfileKind { sharp_step, smooth_step, smooth_step_plus_bump, custom };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::sharp_step: return "sharp_step";
    case ProfileKind::smooth_step: return "smooth_step";
    case ProfileKind::smooth_step_plus_bump: return "smooth_step_plus_bump";
    case ProfileKind::custom: return "custom";
  }
  return "unknown";
}

inline ProfileKind profile_from_string(const std::string& s) {
  if (s == "sharp_step") return ProfileKind::sharp_step;
  if (s == "smooth_step") return ProfileKind::smooth_step;
  if (s == "smooth_step_plus_bump") return ProfileKind::smooth_step_plus_bump;
  if (s == "custom") return ProfileKind::custom;
  throw std::invalid_argument("unknown potential profile '" + s + "'");
}

/// Sampled compactly supported perturbation, optionally with its derivative.
struct Bump {
  Field value;
  std::optional<Field> derivative;
};

/// height * exp(1 - 1/(1 - ((x - center)/half_width)^2)), derivative in closed form.
inline Bump make_bump(const Grid& grid, double center, double half_width, double height) {
  if (!(half_width > 0.0)) throw std::invalid_argument("make_bump: half_width must be positive");
  const auto n = static_cast<Eigen::Index>(grid.size);
  Bump b{Field(n), Field(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (grid.nodes[i] - center) / half_width;
    b.value[i] = height * smooth::bump(u);
    (*b.derivative)[i] = height * smooth::bump_derivative(u) / half_width;
  }
  return b;
}

struct PotentialField {
  Field v;
  double v_minus = 0.0;
  double v_plus = 0.0;
  std::optional<Field> v_prime;
  ProfileKind profile_kind = ProfileKind::smooth_step;
  /// max(|v(-L) - v_-|, |v(L) - v_+|)
  double boundary_mismatch = 0.0;
};

namespace detail {

inline double boundary_mismatch(const Field& v, double vm, double vp) {
  return std::max(std::abs(v[0] - vm), std::abs(v[v.size() - 1] - vp));
}

/// Second-order centred differences, one-sided at the ends.
inline Field finite_difference(const Field& f, double dx) {
  const auto n = f.size();
  Field d(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return d;
}

}  // namespace detail

/// Steplike potential with limits v_- at -L and v_+ at +L.
///
/// smooth_step: v = v_- + (v_+ - v_-) s(x), s the mollifier transition over [-1, 1], s(0) = 1/2.
/// sharp_step: v_- for x < 0, v_+ for x > 0, (v_- + v_+)/2 at x = 0; carries no derivative.
/// A bump is added on top of a smooth step and must stay inside |x| <= L/2.
inline PotentialField make_steplike(const Grid& grid, double v_minus, double v_plus, ProfileKind profile,
                                    const std::optional<Bump>& bump = std::nullopt) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  PotentialField p;
  p.v_minus = v_minus;
  p.v_plus = v_plus;
  p.profile_kind = profile;
  p.v.resize(n);

  if (bump) {
    if (profile != ProfileKind::smooth_step_plus_bump) {
      throw std::invalid_argument("make_steplike: a bump requires the smooth_step_plus_bump profile");
    }
    if (bump->value.size() != n) throw std::invalid_argument("make_steplike: bump not sampled on this grid");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bump->value[i] != 0.0 && std::abs(grid.nodes[i]) > 0.5 * grid.half_length) {
        throw std::invalid_argument("make_steplike: bump support reaches beyond |x| <= L/2");
      }
    }
  } else if (profile == ProfileKind::smooth_step_plus_bump) {
    throw std::invalid_argument("make_steplike: smooth_step_plus_bump requires a bump");
  }

  switch (profile) {
    case ProfileKind::sharp_step:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = grid.nodes[i];
        p.v[i] = x < 0.0 ? v_minus : (x > 0.0 ? v_plus : 0.5 * (v_minus + v_plus));
      }
      break;
    case ProfileKind::smooth_step:
    case ProfileKind::smooth_step_plus_bump: {
      Field vp(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = 0.5 * (grid.nodes[i] + 1.0);
        p.v[i] = v_minus + (v_plus - v_minus) * smooth::transition(u);
        vp[i] = 0.5 * (v_plus - v_minus) * smooth::transition_derivative(u);
      }
      if (bump) {
        p.v += bump->value;
        vp += bump->derivative ? *bump->derivative : detail::finite_difference(bump->value, grid.spacing);
      }
      p.v_prime = std::move(vp);
      break;
    }
    case ProfileKind::custom:
      throw std::invalid_argument("make_steplike: use make_custom_potential for sampled profiles");
  }
  p.boundary_mismatch = detail::boundary_mismatch(p.v, v_minus, v_plus);
  return p;
}

inline PotentialField make_custom_potential(const Grid& grid, Field samples, double v_minus, double v_plus,
                                            std::optional<Field> derivative = std::nullopt) {
  const auto n = static_cast<Eigen::Index>(grid.size);
  if (samples.size() != n) throw std::invalid_argument("make_custom_potential: sample length does not match grid");
  if (derivative && derivative->size() != n) {
    throw std::invalid_argument("make_custom_potential: derivative length does not match grid");
  }
  PotentialField p;
  p.v = std::move(samples);
  p.v_minus = v_minus;
  p.v_plus = v_plus;
  p.v_prime = std::move(derivative);
  p.profile_kind = ProfileKind::custom;
  p.boundary_mismatch = detail::boundary_mismatch(p.v, v_minus, v_plus);
  return p;
}

struct TailReport {
  std::array<double, 3> radii{};
  std::array<double, 3> short_range_sup_tail{};
  std::optional<std::array<double, 3>> long_range_sup_tail;
  bool short_range = false;
  bool long_range = false;
  double threshold = 0.0;
};

namespace detail {
inline bool ladder_verdict(const std::array<double, 3>& ladder, double threshold) {
  return ladder[1] <= ladder[0] && ladder[2] <= ladder[1] && ladder[2] < threshold;
}
}  // namespace detail

/// sup_{|x|>=R} |x (v - v_+-)| and sup_{|x|>=R} |x v'| over R in {L/4, L/2, 3L/4}.
inline TailReport tail_metrics(const Grid& grid, const PotentialField& pot, double threshold = 1e-3) {
  TailReport r;
  r.threshold = threshold;
  const double L = grid.half_length;
  r.radii = {0.25 * L, 0.5 * L, 0.75 * L};
  std::array<double, 3> lr{};
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0, l = 0.0;
    for (Eigen::Index i = 0; i < pot.v.size(); ++i) {
      const double x = grid.nodes[i];
      if (std::abs(x) < r.radii[k]) continue;
      const double limit = x < 0.0 ? pot.v_minus : pot.v_plus;
      s = std::max(s, std::abs(x * (pot.v[i] - limit)));
      if (pot.v_prime) l = std::max(l, std::abs(x * (*pot.v_prime)[i]));
    }
    r.short_range_sup_tail[k] = s;
    lr[k] = l;
  }
  r.short_range = detail::ladder_verdict(r.short_range_sup_tail, threshold);
  if (pot.v_prime) {
    r.long_range_sup_tail = lr;
    r.long_range = detail::ladder_verdict(lr, threshold);
  }
  return r;
}

/// Two-column CSV "x,value" at 17 significant digits.
inline void write_field_csv(std::ostream& os, const Grid& grid, const Field& f) {
  os << "x,value\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < f.size(); ++i) os << grid.nodes[i] << ',' << f[i] << '\n';
}

}  // namespace mourre
