#include <catch_amalgamated.hpp>

#include <cmath>

#include "mourre/hypotheses.hpp"

using namespace mourre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Model {
  OperatorSet set;
  Spectra sp;
};

Model model(const Grid& g, const PotentialField& pot, const CutoffPair& cut) {
  Model m{build_pair(g, pot, cut), {}};
  m.sp = decompose(m.set);
  return m;
}

Model steplike(std::size_t n, double vm = 0.0, double vp = 1.0) {
  const Grid g = make_grid(40.0, n);
  return model(g, make_steplike(g, vm, vp, ProfileKind::smooth_step), make_cutoffs(g));
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Field indicator(const Grid& g, bool right, double edge) {
  Field f(g.nodes.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = (right ? g.nodes[i] > edge : g.nodes[i] < -edge) ? 1.0 : 0.0;
  return f;
}

}  // namespace

TEST_CASE("assumption (iv) vanishes for a partition of unity by squares", "[hypotheses][assumptions]") {
  const Grid g = make_grid(40.0, 401);
  const Model m = model(g, make_steplike(g, 0.0, 1.0, ProfileKind::smooth_step), make_partition_of_unity_squares(g));
  const Matrix iv = assumption_operator(m.set, m.sp, Assumption::iv, SmoothingFunction::bump(0.5, 0.2));
  CHECK(max_abs(iv) < 1e-14);

  // with the default cutoffs j_-^2 + j_+^2 < 1 in the transitions, so (iv) is not zero
  const Model d = steplike(401);
  CHECK(max_abs(assumption_operator(d.set, d.sp, Assumption::iv, SmoothingFunction::bump(0.5, 0.2))) > 1e-4);
}

TEST_CASE("assumption (iii) with steep cutoffs lives near the jumps", "[hypotheses][assumptions]") {
  const Grid g = make_grid(40.0, 801);
  const Model m = model(g, make_steplike(g, 0.0, 0.0, ProfileKind::smooth_step),
                        make_cutoffs_from_samples(g, indicator(g, false, 1.5), indicator(g, true, 1.5)));
  const Matrix iii = assumption_operator(m.set, m.sp, Assumption::iii, SmoothingFunction::bump(1.0, 0.5));
  REQUIRE(iii.rows() == m.set.dim());
  REQUIRE(iii.cols() == 2 * m.set.dim());
  const double peak = max_abs(iii);
  CHECK(peak > 1e-3);
  // H0_+- coincide with H, so the operator is [j, eta(H)]: its mass sits in rows near x = +-1.5
  double near = 0.0;
  for (Eigen::Index i = 0; i < iii.rows(); ++i)
    if (std::abs(std::abs(g.nodes[i]) - 1.5) <= 10.0) near += iii.row(i).squaredNorm();
  CAPTURE(near / iii.squaredNorm());
  CHECK(near >= 0.9 * iii.squaredNorm());
}

TEST_CASE("assumption operators have the expected symmetry", "[hypotheses][assumptions]") {
  const Model m = steplike(401);
  const auto eta = SmoothingFunction::bump(0.5, 0.2);
  for (Assumption a : {Assumption::ii, Assumption::iv}) {
    const Matrix op = assumption_operator(m.set, m.sp, a, eta);
    CHECK(linalg::hermiticity_defect(op) <= 1e-14 * std::max(max_abs(op), 1.0));
  }
  CHECK(assumption_from_string("ii") == Assumption::ii);
  CHECK(to_string(Assumption::iii) == "iii");
  CHECK_THROWS_AS(assumption_from_string("v"), std::invalid_argument);
}

TEST_CASE("compactness classification of the controls", "[hypotheses][compactness]") {
  const std::vector<RefinementLevel> levels{{40.0, 201}, {40.0, 401}, {40.0, 801}};

  const CompactnessReport id = compactness_report(
      "identity", [](const RefinementLevel& l) { return Matrix(Matrix::Identity(static_cast<Eigen::Index>(l.size), static_cast<Eigen::Index>(l.size))); },
      levels);
  CHECK(id.verdict == CompactnessVerdict::non_compact);
  for (double t : id.tail_ratio) CHECK(t == 1.0);

  const CompactnessReport rank1 = compactness_report(
      "rank-1",
      [](const RefinementLevel& l) {
        const Grid g = make_grid(l.half_length, l.size);
        Vector u(g.nodes.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::exp(-g.nodes[i] * g.nodes[i]);
        u /= u.norm();
        return Matrix(u * u.adjoint());
      },
      levels);
  CHECK(rank1.verdict == CompactnessVerdict::compact_consistent);
  CHECK(rank1.stability < 1e-12);
  for (const auto& s : rank1.singular_values) {
    REQUIRE(s.size() == 40);
    CHECK_THAT(s[0], WithinAbs(1.0, 1e-12));
    CHECK(s[1] < 1e-12);
    CHECK(std::is_sorted(s.rbegin(), s.rend()));
  }
  CHECK(rank1.levels.size() == 3);
  CHECK(rank1.levels[2].size == 801);

  CHECK_THROWS_AS(compactness_report("one", [](const RefinementLevel&) { return Matrix::Identity(3, 3).eval(); },
                                     std::vector<RefinementLevel>{{40.0, 201}}),
                  std::invalid_argument);
}

TEST_CASE("classification thresholds", "[hypotheses][compactness]") {
  const std::vector<RefinementLevel> two{{40.0, 201}, {40.0, 401}};
  auto geometric = [](double q) {
    std::vector<double> s;
    for (int k = 0; k < 40; ++k) s.push_back(std::pow(q, k));
    return s;
  };
  // sigma_20 / sigma_1 = q^19
  CHECK(classify_singular_values("fast", two, {geometric(0.5), geometric(0.5)}).verdict ==
        CompactnessVerdict::compact_consistent);
  CHECK(classify_singular_values("slow", two, {geometric(0.99), geometric(0.99)}).verdict ==
        CompactnessVerdict::non_compact);
  CHECK(classify_singular_values("between", two, {geometric(0.85), geometric(0.85)}).verdict ==
        CompactnessVerdict::inconclusive);
  // fast decay but sigma_1 moves by 30% between levels
  auto moved = geometric(0.5);
  for (double& v : moved) v *= 1.3;
  const CompactnessReport drift = classify_singular_values("drift", two, {moved, geometric(0.5)});
  CHECK_THAT(drift.stability, WithinAbs(0.3, 1e-12));
  CHECK(drift.verdict == CompactnessVerdict::inconclusive);
  CHECK(classify_singular_values("zero", two, {{0.0}, {0.0}}).verdict == CompactnessVerdict::compact_consistent);
}

TEST_CASE("short-range operator", "[hypotheses][short_range]") {
  const Complex z(0.0, 1.0);
  SECTION("degenerate channel gives zero") {
    const Grid g = make_grid(40.0, 401);
    const Field zero = Field::Zero(g.nodes.size()), one = Field::Ones(g.nodes.size());
    const Model m = model(g, make_steplike(g, 1.0, 1.0, ProfileKind::smooth_step), make_cutoffs_from_samples(g, zero, one));
    const SmoothedOperator op = short_range_operator(m.set, m.sp, z);
    CHECK(max_abs(op.matrix) < 1e-12);
    CHECK(op.smoothing.find("plateau") != std::string::npos);
  }
  SECTION("real z is rejected") {
    const Model m = steplike(201);
    CHECK_THROWS_AS(short_range_operator(m.set, m.sp, Complex(1.0, 0.0)), std::domain_error);
  }
  SECTION("a slowly decaying tail spoils the compact signal") {
    const std::vector<RefinementLevel> levels{{40.0, 401}, {40.0, 801}};
    auto build = [&](bool slow) {
      return [slow, z](const RefinementLevel& l) {
        const Grid g = make_grid(l.half_length, l.size);
        Field v(g.nodes.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          const double x = g.nodes[i];
          const double s = smooth::transition(0.5 * (x + 1.0));
          v[i] = s + (slow ? 1.0 / std::sqrt(1.0 + std::abs(x)) : 0.0);
        }
        const Model m = model(g, make_custom_potential(g, v, 0.0, 1.0), make_cutoffs(g));
        return short_range_operator(m.set, m.sp, z).matrix;
      };
    };
    const CompactnessReport fast = compactness_report("set1", build(false), levels);
    const CompactnessReport slow = compactness_report("slow", build(true), levels);
    CHECK(fast.verdict == CompactnessVerdict::compact_consistent);
    CHECK(slow.verdict != CompactnessVerdict::compact_consistent);
    CHECK(slow.tail_ratio.back() > 10.0 * fast.tail_ratio.back());
  }
}

TEST_CASE("long-range operator", "[hypotheses][long_range]") {
  SECTION("constant potential, single channel") {
    const Grid g = make_grid(40.0, 401);
    const Field zero = Field::Zero(g.nodes.size()), one = Field::Ones(g.nodes.size());
    const Model m = model(g, make_steplike(g, 1.0, 1.0, ProfileKind::smooth_step), make_cutoffs_from_samples(g, zero, one));
    const Matrix op = long_range_operator(m.set, m.sp);
    CHECK(linalg::operator_norm(op) < 0.1 * linalg::hermitian_norm(m.set.commutator_iHA));
  }
  SECTION("needs the derivative of v") {
    const Grid g = make_grid(40.0, 201);
    const Model m = model(g, make_steplike(g, 0.0, 1.0, ProfileKind::sharp_step), make_cutoffs(g));
    CHECK_THROWS(long_range_operator(m.set, m.sp));
  }
}

TEST_CASE("resolvent commutator identity", "[hypotheses][step1]") {
  const Model m = steplike(801);
  const ResolventIdentityReport r = resolvent_commutator_identity(m.set, m.sp, Complex(0.0, 1.0));
  CHECK(r.residual <= 1e-8);
  CHECK(r.lhs_norm > 1e-3);
  CHECK(r.verdict);
  CHECK_THROWS_AS(resolvent_commutator_identity(m.set, m.sp, Complex(2.0, 0.0)), std::domain_error);
}

TEST_CASE("C1 probe on a finite-dimensional model", "[hypotheses][c1]") {
  const Model m = steplike(401);
  const SpectralDecomposition dec_a = eigendecompose(m.set.A);
  const auto states = random_interior_states(m.set.grid, 3, 7);
  for (const auto& s : states) CHECK_THAT(s.norm(), WithinAbs(1.0, 1e-12));

  const C1Report r = c1_probe(m.set, m.sp, dec_a, Complex(0.0, 1.0), states);
  CHECK(r.verdict);
  CHECK(r.richardson_mismatch <= 1e-6);
  CHECK(r.limit_mismatch < 1e-3);
  REQUIRE(r.cauchy_defect.size() == 3);
  CHECK(r.cauchy_defect[0] > r.cauchy_defect[1]);
  CHECK(r.cauchy_defect[1] > r.cauchy_defect[2]);
  CHECK(r.min_decade_ratio >= 3.0);

  CHECK_THROWS_AS(c1_probe(m.set, m.sp, dec_a, Complex(0.0, 1.0), {2.0 * states[0]}), std::invalid_argument);
  CHECK_THROWS_AS(c1_probe(m.set, m.sp, dec_a, Complex(0.0, 1.0), states, {1e-3, 1e-2}), std::invalid_argument);
  CHECK_THROWS_AS(c1_probe(m.set, m.sp, dec_a, Complex(0.5, 0.0), states), std::domain_error);
}

TEST_CASE("interior states are reproducible", "[hypotheses][c1]") {
  const Grid g = make_grid(40.0, 401);
  const auto a = random_interior_states(g, 4, 11);
  const auto b = random_interior_states(g, 4, 11);
  const auto c = random_interior_states(g, 4, 12);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);
  CHECK((a[0] - c[0]).norm() > 0.1);
}
