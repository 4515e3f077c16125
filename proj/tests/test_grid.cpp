#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mourre/grid.hpp"

using namespace mourre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::Index node_at(const Grid& g, double x) {
  return static_cast<Eigen::Index>(std::llround((x + g.half_length) / g.spacing));
}

// Closed-form cutoff written independently of the library.
double reference_j_plus(double x) {
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = f(x - 1.0), b = f(2.0 - x);
  return a / (a + b);
}

}  // namespace

TEST_CASE("uniform grid arithmetic", "[grid]") {
  const Grid g = make_grid(40.0, 1601);
  CHECK_THAT(g.spacing, WithinAbs(0.05, 1e-15));
  CHECK(g.nodes[0] == -40.0);
  CHECK(g.nodes[1600] == 40.0);
  CHECK(g.nodes[800] == 0.0);
  CHECK_THAT(make_grid(1.0, 17).spacing, WithinAbs(0.125, 1e-15));
}

TEST_CASE("grid preconditions", "[grid]") {
  CHECK_THROWS_AS(make_grid(40.0, 1600), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(40.0, 15), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.0, 17), std::invalid_argument);
}

TEST_CASE("grid nodes mirror exactly through the origin", "[grid]") {
  const Grid g = make_grid(40.0, 801);
  for (std::size_t i = 0; i < g.size; ++i) CHECK(g.x(i) == -g.x(g.mirror(i)));
}

TEST_CASE("cutoff plateaus and transition", "[grid][cutoffs]") {
  const Grid g = make_grid(40.0, 1601);
  const CutoffPair c = make_cutoffs(g);
  CHECK(c.j_plus[node_at(g, 0.5)] == 0.0);
  CHECK(c.j_plus[node_at(g, 1.0)] == 0.0);
  CHECK(c.j_plus[node_at(g, 3.0)] == 1.0);
  CHECK(c.j_plus[node_at(g, 2.0)] == 1.0);
  CHECK(c.j_minus[node_at(g, 3.0)] == 0.0);
  CHECK_THAT(c.j_minus[node_at(g, -1.5)], WithinAbs(c.j_plus[node_at(g, 1.5)], 0.0));
  CHECK_THAT(c.j_plus[node_at(g, 1.5)], WithinAbs(0.5, 1e-15));
  for (double x : {1.05, 1.2, 1.37, 1.5, 1.81, 1.95}) {
    const Eigen::Index i = node_at(g, x);
    CHECK_THAT(c.j_plus[i], WithinAbs(reference_j_plus(g.nodes[i]), 1e-14));
  }
}

TEST_CASE("cutoff reflection and partition defect support", "[grid][cutoffs]") {
  const Grid g = make_grid(40.0, 801);
  const CutoffPair c = make_cutoffs(g);
  for (std::size_t i = 0; i < g.size; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    CHECK(c.j_minus[k] == c.j_plus[static_cast<Eigen::Index>(g.mirror(i))]);
    if (std::abs(g.x(i)) > 2.0) CHECK(c.jj_sum_sq[k] == 1.0);
  }
  // inside the transitions j_-^2 + j_+^2 < 1 somewhere (the squares do not form a partition)
  CHECK(c.jj_sum_sq.minCoeff() < 1.0);
  CHECK(c.j_plus.minCoeff() >= 0.0);
  CHECK(c.j_plus.maxCoeff() <= 1.0);
}

TEST_CASE("cutoffs need room for the transition region", "[grid][cutoffs]") {
  CHECK_THROWS_AS(make_cutoffs(make_grid(3.0, 101)), std::domain_error);
}

TEST_CASE("smooth step potential", "[grid][potential]") {
  const Grid g = make_grid(40.0, 1601);
  const PotentialField p = make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step);
  CHECK(p.v[0] == 0.0);
  CHECK(p.v[1600] == 1.0);
  CHECK_THAT(p.v[800], WithinAbs(0.5, 1e-15));
  CHECK(p.boundary_mismatch == 0.0);
  for (Eigen::Index i = 0; i < p.v.size(); ++i) CHECK_THAT(p.v[i] + p.v[1600 - i], WithinAbs(1.0, 1e-14));
  REQUIRE(p.v_prime);
  // derivative against a fine centred difference of the closed-form profile
  const auto profile = [](double x) { return reference_j_plus(1.5 + 0.5 * x); };
  for (double x : {-0.7, -0.2, 0.0, 0.4, 0.9}) {
    const Eigen::Index i = node_at(g, x);
    const double h = 1e-5, xi = g.nodes[i];
    const double fd = (profile(xi + h) - profile(xi - h)) / (2.0 * h);
    CHECK_THAT(p.v[i], WithinAbs(profile(xi), 1e-14));
    CHECK_THAT((*p.v_prime)[i], WithinAbs(fd, 1e-8));
  }
}

TEST_CASE("degenerate and sharp steps", "[grid][potential]") {
  const Grid g = make_grid(40.0, 1601);
  CHECK(make_steplike(g, 0.0, 0.0, ProfileKind::smooth_step).v.cwiseAbs().maxCoeff() == 0.0);
  const PotentialField s = make_steplike(g, 0.0, 1.0, ProfileKind::sharp_step);
  CHECK(s.v[799] == 0.0);
  CHECK(s.v[800] == 0.5);
  CHECK(s.v[801] == 1.0);
  CHECK_FALSE(s.v_prime);
}

TEST_CASE("bumps stay inside half the box", "[grid][potential]") {
  const Grid g = make_grid(40.0, 801);
  const Bump inside = make_bump(g, 0.0, 1.0, -3.0);
  CHECK_NOTHROW(make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step_plus_bump, inside));
  const Bump outside = make_bump(g, 25.0, 1.0, -3.0);
  CHECK_THROWS_AS(make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step_plus_bump, outside), std::invalid_argument);
  const PotentialField p = make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step_plus_bump, inside);
  CHECK_THAT(p.v[400], WithinAbs(0.5 - 3.0, 1e-12));
}

TEST_CASE("tail metrics", "[grid][tails]") {
  const Grid g = make_grid(40.0, 801);

  const TailReport zero = tail_metrics(g, make_steplike(g, 0.0, 0.0, ProfileKind::smooth_step));
  CHECK(zero.short_range);
  CHECK(zero.long_range);
  for (double t : zero.short_range_sup_tail) CHECK(t == 0.0);

  const TailReport step = tail_metrics(g, make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step));
  CHECK(step.short_range);
  CHECK(step.long_range);
  for (double t : step.short_range_sup_tail) CHECK(t == 0.0);
  for (double t : *step.long_range_sup_tail) CHECK(t == 0.0);

  // v = (1 + x^2)^{-1/2} tends to 0 on both sides; |x| v -> 1, so the short-range test fails
  Field slow(g.nodes.size()), dslow(g.nodes.size());
  for (Eigen::Index i = 0; i < slow.size(); ++i) {
    const double x = g.nodes[i];
    slow[i] = 1.0 / std::sqrt(1.0 + x * x);
    dslow[i] = -x / std::pow(1.0 + x * x, 1.5);
  }
  const TailReport tail = tail_metrics(g, make_custom_potential(g, slow, 0.0, 0.0, dslow));
  CHECK_FALSE(tail.short_range);
  // closed form at R = L/4 = 10: sup_{|x|>=10} |x|/sqrt(1+x^2) = 40/sqrt(1601)
  CHECK_THAT(tail.short_range_sup_tail[0], WithinRel(40.0 / std::sqrt(1601.0), 1e-12));
}

TEST_CASE("field csv has two columns at full precision", "[grid]") {
  const Grid g = make_grid(1.0, 17);
  std::ostringstream os;
  write_field_csv(os, g, g.nodes);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,value");
  std::getline(is, line);
  CHECK(line == "-1,-1");
  std::getline(is, line);
  CHECK(line == "-0.875,-0.875");
}
