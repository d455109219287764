#include "support.hpp"

#include <doctest.h>

using namespace nefdiag;
using namespace testsupport;

namespace {

LatticeMatrix lattice(std::initializer_list<std::array<int, 3>> rows) {
  LatticeMatrix m;
  std::size_t i = 0;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < 3; ++j) m.rows[i][j] = r[j];
    ++i;
  }
  return m;
}

std::array<BigInt, 3> triple(int a, int b, int c) { return {BigInt(a), BigInt(b), BigInt(c)}; }

}  // namespace

TEST_CASE("candidate model for E1 and P2") {
  auto m = candidate_model(e1_params(), quarter_half_quarter());
  REQUIRE(m.size() == 3);
  CHECK(m.atoms[0].lambda == -1.0);
  CHECK(m.atoms[0].nu == 1.0);
  CHECK(m.atoms[1].lambda == 0.0);
  CHECK(m.atoms[1].nu == 0.0);
  CHECK(m.atoms[2].lambda == 1.0);
  CHECK(m.atoms[2].nu == 1.0);
  CHECK(m.exponent == 1);

  auto m2 = candidate_model(p2_params(), quarter_half_quarter());
  CHECK(m2.atoms[0].nu == 0.0);
  CHECK(m2.atoms[1].nu == -1.0);
  CHECK(m2.atoms[2].nu == 0.0);
}

TEST_CASE("candidate model errors") {
  // lambda^4: a = 0, 2Ae - db = 0, c = 0, f b^2 A = 0
  auto quad = DiagonalVFParams::make(-1, 0, 1, 0, 0, 0, 0);
  try {
    candidate_model(quad, {Rational(1)});
    FAIL("expected NRootDeficit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NRootDeficit);
  }
  try {
    candidate_model(e1_params(), {Rational(1, 2), Rational(1, 2)});
    FAIL("expected WeightCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WeightCountMismatch);
  }
}

TEST_CASE("normalize model") {
  auto m = normalize_model(candidate_model(e1_params(), quarter_half_quarter()));
  CHECK(m.atoms[0].lambda == 0.0);
  CHECK(m.atoms[0].nu == 0.0);
  CHECK(m.atoms[1].lambda == 1.0);
  CHECK(m.atoms[1].nu == -1.0);
  CHECK(m.atoms[2].lambda == 2.0);
  CHECK(m.atoms[2].nu == 0.0);
  CHECK(m.weights == quarter_half_quarter());

  // Already starting at the origin: abscissas unchanged, ordinates lambda^2.
  CandidateModel two;
  two.exponent = 1;
  two.weights = {Rational(1, 2), Rational(1, 2)};
  two.atoms = {Atom{0, 5, Rational(0), Rational(5)}, Atom{1, 7, Rational(1), Rational(7)}};
  auto n = normalize_model(two);
  CHECK(n.atoms[0].lambda == 0.0);
  CHECK(n.atoms[0].nu == 0.0);
  CHECK(n.atoms[1].lambda == 1.0);
  CHECK(n.atoms[1].nu == 1.0);
  CHECK(normalize_model(n).atoms[1].nu == 1.0);
}

TEST_CASE("lambda matrix") {
  auto m = normalize_model(candidate_model(e1_params(), quarter_half_quarter()));
  CHECK(build_lambda_matrix(m) == lattice({{1, -1, 0}, {2, 0, 0}, {0, 0, 0}}));

  CandidateModel four;
  four.exponent = 1;
  for (int x : {0, 1, 2, 3}) four.atoms.push_back(Atom{double(x), double(x * x), Rational(x), Rational(x * x)});
  four.weights = {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)};
  CHECK(build_lambda_matrix(normalize_model(four)) == lattice({{1, 1, 0}, {2, 4, 0}, {3, 9, 0}}));

  CandidateModel two = four;
  two.atoms.resize(2);
  two.weights = {Rational(1, 2), Rational(1, 2)};
  try {
    build_lambda_matrix(two);
    FAIL("expected UnsupportedArity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedArity);
  }
}

TEST_CASE("star condition examples") {
  auto s1 = star_condition(lattice({{1, -1, 0}, {2, 0, 0}, {0, 0, 0}}));
  CHECK(s1.holds);
  CHECK(s1.kernel_dimension == 1);

  auto s2 = star_condition(lattice({{1, 1, 0}, {2, 2, 0}, {0, 0, 0}}));
  CHECK_FALSE(s2.holds);
  REQUIRE(s2.witness);
  CHECK(*s2.witness == triple(2, -1, 0));
  CHECK(s2.method == StarMethod::BoundedSearch);
  CHECK(s2.bound == 50);

  auto s3 = star_condition(lattice({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  CHECK(s3.holds);
  CHECK(s3.kernel_dimension == 0);
  CHECK(s3.method == StarMethod::ExactKernel);
}

TEST_CASE("star witness solves the kernel equation exactly") {
  auto m = lattice({{1, 2, 3}, {2, 4, 6}, {1, 1, 1}});
  auto s = star_condition(m);
  REQUIRE_FALSE(s.holds);
  for (std::size_t j = 0; j < 3; ++j) {
    Rational acc = 0;
    for (std::size_t i = 0; i < 3; ++i) acc += Rational((*s.witness)[i]) * m.rows[i][j];
    CHECK(acc == 0);
  }
}

TEST_CASE("four rational abscissas carry an integer relation") {
  // Offsets 1, 2, 3 on the parabola: 3 (1,1) - 3 (2,4) + (3,9) = 0.
  auto s = star_condition(lattice({{1, 1, 0}, {2, 4, 0}, {3, 9, 0}}));
  CHECK_FALSE(s.holds);
  REQUIRE(s.witness);
  CHECK(*s.witness == triple(3, -3, 1));
}

TEST_CASE("inexact lattices use a numeric relation search") {
  LatticeMatrix m = LatticeMatrix::from_doubles({{{std::sqrt(2.0), 2.0, 0}, {std::sqrt(3.0), 3.0, 0}, {std::sqrt(5.0), 5.0, 0}}});
  m.exact = false;
  auto s = star_condition(m);
  CHECK(s.method == StarMethod::NumericSearch);
  CHECK(s.holds);

  LatticeMatrix r = lattice({{1, 1, 0}, {2, 4, 0}, {3, 9, 0}});
  r.exact = false;
  auto t = star_condition(r);
  CHECK_FALSE(t.holds);
  CHECK(*t.witness == triple(3, -3, 1));
}

TEST_CASE("verdict examples") {
  auto base = candidate_model(e1_params(), quarter_half_quarter());
  auto v = admissibility_verdict(base);
  CHECK(v.outcome == VerdictCase::CaseA);
  CHECK(v.N == 1);
  CHECK(v.theta_full_plane);
  REQUIRE(v.star);
  CHECK(v.star->holds);

  auto neg = base;
  neg.weights = {Rational(-1, 3), Rational(-1, 3), Rational(-1, 3)};
  neg.exponent = 2;
  auto vb = admissibility_verdict(neg);
  CHECK(vb.outcome == VerdictCase::CaseB);
  CHECK(vb.N == 2);

  auto frac = base;
  frac.exponent = Rational(3, 2);
  auto vr = admissibility_verdict(frac);
  CHECK(vr.outcome == VerdictCase::Rejected);
  CHECK(vr.reason_string() == "exponent not a positive integer");
  CHECK_FALSE(vr.inconclusive);
}

TEST_CASE("verdict rejection reasons") {
  auto base = candidate_model(e1_params(), quarter_half_quarter());
  auto mixed = base;
  mixed.weights = {Rational(3, 4), Rational(1, 2), Rational(-1, 4)};
  CHECK(admissibility_verdict(mixed).reason == RejectReason::MixedSigns);

  auto unnorm = base;
  unnorm.weights = {Rational(1, 4), Rational(1, 4), Rational(1, 4)};
  CHECK(admissibility_verdict(unnorm).reason == RejectReason::NotNormalized);

  auto odd = base;
  odd.weights = {Rational(-1, 4), Rational(-1, 2), Rational(-1, 4)};
  odd.exponent = 3;
  CHECK(admissibility_verdict(odd).reason == RejectReason::ExponentNotEvenInteger);

  auto point = base;
  point.weights = {Rational(0), Rational(1), Rational(0)};
  CHECK(admissibility_verdict(point).reason == RejectReason::PointMass);

  auto none = base;
  none.weights = {Rational(0), Rational(0), Rational(0)};
  CHECK(admissibility_verdict(none).reason == RejectReason::NoContributingAtoms);
}

TEST_CASE("two contributing atoms use the one-dimensional section") {
  auto base = candidate_model(e1_params(), quarter_half_quarter());
  base.weights = {Rational(1, 2), Rational(0), Rational(1, 2)};
  auto v = admissibility_verdict(base);
  CHECK(v.accepted());
  CHECK(v.one_dimensional);
  CHECK_FALSE(v.star.has_value());
  CHECK(v.contributing_atoms == 2);
}

TEST_CASE("verdict is invariant under permutation of atoms") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto f = random_admissible(rng, 1 + t % 3);
    auto m = candidate_model(f.params, f.weights);
    if (t % 2) m.weights[0] = -m.weights[0];
    auto v = admissibility_verdict(m);
    auto p = m;
    std::reverse(p.atoms.begin(), p.atoms.end());
    std::reverse(p.weights.begin(), p.weights.end());
    auto w = admissibility_verdict(p);
    CHECK(v.outcome == w.outcome);
    CHECK(v.reason == w.reason);
    CHECK(v.N == w.N);
  }
}
