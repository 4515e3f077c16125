#include <catch_amalgamated.hpp>

#include <cmath>

#include "mourre/scattering.hpp"

using namespace mourre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Model {
  OperatorSet set;
  Spectra sp;
};

Model model(double half_length, std::size_t n, double vm, double vp,
            ProfileKind profile = ProfileKind::smooth_step, std::optional<Bump> bump = std::nullopt) {
  const Grid g = make_grid(half_length, n);
  if (profile == ProfileKind::smooth_step_plus_bump) bump = make_bump(g, 0.0, 1.0, -3.0);
  Model m{build_pair(g, make_steplike(g, vm, vp, profile, bump), make_cutoffs(g)), {}};
  m.sp = decompose(m.set);
  return m;
}

std::vector<double> ladder(double step, int count) {
  std::vector<double> t;
  for (int k = 0; k < count; ++k) t.push_back(step * k);
  return t;
}

}  // namespace

TEST_CASE("channel packets", "[scattering][packet]") {
  const Grid g = make_grid(40.0, 1601);
  const TwoSpaceState phi = make_channel_packet(g, {Channel::minus, -25.0, 1.2, 3.0});
  CHECK_THAT(phi.norm(), WithinAbs(1.0, 1e-14));
  CHECK(phi.phi_plus.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THAT(mean_momentum(g, phi.phi_minus), WithinAbs(1.2, 1e-3));

  // <phi, (-Delta) phi> = k0^2 + 1/(4 sigma^2) for a continuum Gaussian
  const double energy = phi.phi_minus.dot(build_laplacian(g) * phi.phi_minus).real();
  CHECK_THAT(energy, WithinAbs(1.2 * 1.2 + 1.0 / 36.0, 1e-2));
  CHECK(std::abs(energy - 1.44) < 2.0 * packet_energy_width(1.2, 3.0));

  const TwoSpaceState plus = make_channel_packet(g, {Channel::plus, 20.0, -1.0, 2.0});
  CHECK(plus.phi_minus.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THAT(mean_momentum(g, plus.phi_plus), WithinAbs(-1.0, 1e-3));

  CHECK_NOTHROW(make_channel_packet(g, {Channel::minus, -25.0, 1.0, 3.0}));
  CHECK_THROWS_AS(make_channel_packet(g, {Channel::minus, -25.5, 1.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_channel_packet(g, {Channel::minus, -3.0, 1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_channel_packet(g, {Channel::plus, 3.0, 1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_channel_packet(g, {Channel::minus, -20.0, 0.0, 3.0}), std::invalid_argument);
}

TEST_CASE("momentum split", "[scattering][packet]") {
  const Grid g = make_grid(40.0, 801);
  const Vector right = gaussian_packet(g, 0.0, 1.5, 3.0);
  const MomentumSplit s = momentum_split(right);
  CHECK((s.positive + s.negative - right).norm() < 1e-12);
  CHECK(s.negative.norm() < 1e-6);
  CHECK_THAT(s.positive.norm(), WithinAbs(1.0, 1e-6));

  const TwoSpaceState phi{gaussian_packet(g, -20.0, 1.5, 3.0), gaussian_packet(g, 20.0, 1.5, 3.0)};
  // W_+ keeps what runs away from the junction: channel + moving right, nothing in channel -
  const TwoSpaceState out = initial_set_projection(phi, Direction::outgoing);
  CHECK(out.phi_minus.norm() < 1e-6);
  CHECK_THAT(out.phi_plus.norm(), WithinAbs(1.0, 1e-6));
  const TwoSpaceState in = initial_set_projection(phi, Direction::incoming);
  CHECK_THAT(in.phi_minus.norm(), WithinAbs(1.0, 1e-6));
  CHECK(in.phi_plus.norm() < 1e-6);
}

TEST_CASE("boundary margin", "[scattering][margin]") {
  const Grid g = make_grid(40.0, 801);
  const BoundaryMargin mid = boundary_margin(g, density(gaussian_packet(g, 20.0, 1.0, 3.0)));
  CHECK(mid.admissible);
  CHECK_THAT(mid.margin, WithinAbs(20.0, 1e-6));
  CHECK_THAT(mid.spread, WithinRel(3.0, 1e-6));
  CHECK_FALSE(boundary_margin(g, density(gaussian_packet(g, 30.0, 1.0, 3.0))).admissible);
  // a small lump near the wall below the mass floor is ignored
  Vector two = gaussian_packet(g, 10.0, 1.0, 3.0) + 1e-3 * gaussian_packet(g, -36.0, 1.0, 1.0);
  CHECK(boundary_margin(g, density(two)).admissible);
}

TEST_CASE("wave operator probe, free identity case", "[scattering][wave]") {
  const Model m = model(60.0, 1201, 0.0, 0.0);
  const TwoSpaceState phi = make_channel_packet(m.set.grid, {Channel::plus, 25.0, 1.0, 3.0});
  const WaveProbeReport r = wave_operator_probe(m.set, m.sp, phi, Direction::outgoing, ladder(1.0, 12));
  std::size_t admissible = 0;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    if (!r.admissible[k]) continue;
    ++admissible;
    CHECK(r.defect[k] < 0.02);
  }
  CHECK(admissible >= 5);
  CHECK_FALSE(r.admissible.back());
  CHECK_THAT(r.isometry_ratio, WithinAbs(1.0, 0.02));

  // the direction has to match the motion of the packet
  CHECK_THROWS_AS(wave_operator_probe(m.set, m.sp, phi, Direction::incoming, ladder(1.0, 3)), std::invalid_argument);
  CHECK_THROWS_AS(wave_operator_probe(m.set, m.sp, phi, Direction::outgoing, {2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("wave operator probe across the step", "[scattering][wave]") {
  const Model m = model(80.0, 1601, 0.0, 1.0);
  const TwoSpaceState phi = make_channel_packet(m.set.grid, {Channel::minus, -25.0, 1.5, 3.0});
  const WaveProbeReport r = wave_operator_probe(m.set, m.sp, phi, Direction::incoming, ladder(2.0, 10));
  CHECK(r.best_time < 0.0);
  CHECK(r.isometry_ratio >= 0.97);
  CHECK(r.isometry_ratio <= 1.03);

  // launched on the junction, the Cauchy ladder shrinks while the packet leaves it
  const TwoSpaceState near = make_channel_packet(m.set.grid, {Channel::minus, -6.0, 1.5, 3.0});
  const WaveProbeReport n = wave_operator_probe(m.set, m.sp, near, Direction::incoming, ladder(1.0, 12));
  std::vector<double> steps;
  for (double s : n.ladder)
    if (std::isfinite(s)) steps.push_back(s);
  REQUIRE(steps.size() >= 4);
  CHECK(steps.front() > 1e-3);
  for (std::size_t k = 1; k < steps.size(); ++k) CHECK(steps[k] <= steps[k - 1]);
  CHECK(n.isometry_ratio >= 0.97);
  CHECK(n.isometry_ratio <= 1.03);
}

TEST_CASE("no admissible time is an error", "[scattering][wave]") {
  const Model m = model(40.0, 801, 0.0, 0.0);
  const TwoSpaceState phi = make_channel_packet(m.set.grid, {Channel::plus, 24.0, 1.0, 3.0});
  CHECK_THROWS_AS(wave_operator_probe(m.set, m.sp, phi, Direction::outgoing, {10.0, 20.0}), std::runtime_error);
}

TEST_CASE("completeness probe", "[scattering][completeness]") {
  SECTION("outgoing packet leaves the cutoff transitions") {
    // no bound states for the plain step, so nothing stays behind in [-2, 2]
    const Model m = model(60.0, 1201, 0.0, 1.0);
    const Vector psi = gaussian_packet(m.set.grid, 10.0, 1.5, 3.0);
    const CompletenessReport r = completeness_probe(m.set, m.sp, psi, Direction::outgoing, ladder(1.0, 12));
    std::size_t last = 0;
    for (std::size_t k = 0; k < r.times.size(); ++k)
      if (r.admissible[k]) last = k;
    REQUIRE(last >= 3);
    for (std::size_t k = 1; k <= last; ++k) CHECK(r.froufrou_norms[k] <= r.froufrou_norms[k - 1] + 1e-12);
    CHECK(r.froufrou_norms[last] < 0.02);
    CHECK(r.verdict);
    CHECK(r.range_defect < 0.05);
    CHECK(r.chain_rule_defect < 0.05);
  }
  SECTION("a packet away from [-2, 2] starts with a small defect") {
    const Model m = model(60.0, 1201, 0.0, 1.0);
    const Vector psi = gaussian_packet(m.set.grid, 20.0, 1.5, 2.0);
    const CompletenessReport r = completeness_probe(m.set, m.sp, psi, Direction::outgoing, {0.0});
    CHECK(r.froufrou_norms.front() < 0.01);
  }
  SECTION("a bound state does not decay") {
    const Model m = model(60.0, 1201, 0.0, 1.0, ProfileKind::smooth_step_plus_bump);
    REQUIRE(m.sp.H.eigenvalues()[0] < 0.0);
    const Vector bound = m.sp.H.vector(0);
    const CompletenessReport r = completeness_probe(m.set, m.sp, bound, Direction::outgoing, ladder(1.0, 12));
    CHECK_FALSE(r.verdict);
    for (std::size_t k = 0; k < r.times.size(); ++k) CHECK_THAT(r.froufrou_norms[k], WithinRel(r.froufrou_norms[0], 1e-8));
    CHECK(r.froufrou_norms.front() > 0.05);
  }
}

TEST_CASE("sharp step oracle", "[scattering][oracle]") {
  const double r2 = std::pow((std::sqrt(2.0) - 1.0) / (std::sqrt(2.0) + 1.0), 2);
  const ScatteringCoefficients c = sharp_step_oracle(2.0, 0.0, 1.0);
  CHECK_THAT(c.reflection, WithinAbs(r2, 1e-15));
  CHECK_THAT(c.reflection, WithinAbs(0.029437, 1e-6));
  CHECK_THAT(c.transmission, WithinAbs(0.970563, 1e-6));
  CHECK(c.flux_defect < 1e-15);

  const ScatteringCoefficients flat = sharp_step_oracle(1.7, 0.4, 0.4);
  CHECK(flat.reflection == 0.0);
  CHECK(flat.transmission == 1.0);

  CHECK(sharp_step_oracle(4.0, 0.0, 1.0).reflection < c.reflection);
  CHECK(sharp_step_oracle(8.0, 0.0, 1.0).reflection < sharp_step_oracle(4.0, 0.0, 1.0).reflection);
  CHECK_THROWS_AS(sharp_step_oracle(0.5, 0.0, 1.0), std::domain_error);
}

TEST_CASE("energy-averaged oracle", "[scattering][oracle]") {
  // a very wide packet is monochromatic
  const ScatteringCoefficients wide = averaged_step_oracle(std::sqrt(2.0), 200.0, 0.0, 1.0);
  CHECK_THAT(wide.reflection, WithinRel(sharp_step_oracle(2.0, 0.0, 1.0).reflection, 1e-4));
  const ScatteringCoefficients narrow = averaged_step_oracle(std::sqrt(2.0), 3.0, 0.0, 1.0);
  CHECK_THAT(narrow.reflection + narrow.transmission, WithinAbs(1.0, 1e-15));
  // R is convex in k near sqrt(2), so averaging raises it
  CHECK(narrow.reflection > sharp_step_oracle(2.0, 0.0, 1.0).reflection);
}

TEST_CASE("propagated scattering probabilities", "[scattering][coefficients]") {
  SECTION("no potential: everything is transmitted") {
    const Model m = model(60.0, 1201, 0.0, 0.0);
    const ScatteringCoefficients c = scattering_coefficients(m.set, m.sp, 2.0);
    CHECK(c.reflection < 0.01);
    CHECK_THAT(c.transmission, WithinAbs(1.0, 0.01));
  }
  SECTION("smooth step conserves probability") {
    const Model m = model(80.0, 1601, 0.0, 1.0);
    for (double l : {1.5, 2.0, 3.0}) {
      const ScatteringCoefficients c = scattering_coefficients(m.set, m.sp, l);
      CHECK(c.flux_defect < 1e-2);
      CHECK(c.reflection >= 0.0);
      CHECK(c.transmission >= 0.0);
      // a smooth step reflects less than a sharp one
      CHECK(c.reflection < averaged_step_oracle(std::sqrt(l), 3.0, 0.0, 1.0).reflection);
    }
  }
  SECTION("closed channel") {
    const Model m = model(40.0, 401, 0.0, 1.0);
    CHECK_THROWS_AS(scattering_coefficients(m.set, m.sp, 0.5), std::domain_error);
    CHECK_THROWS_AS(scattering_coefficients(m.set, m.sp, -0.5), std::domain_error);
  }
}
