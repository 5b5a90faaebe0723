#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qstate/errors.hpp"
#include "qstate/quasistate.hpp"
#include "test_support.hpp"

using namespace qstate;
using qstate::test::mesh;

TEST_SUITE("quasistate") {

TEST_CASE("zeta of coordinate squares") {
  const MeshPtr m = mesh(6);
  const ScalarField x2 = test::square(m, 0), y2 = test::square(m, 1), z2 = test::square(m, 2);
  for (const ScalarField* f : {&x2, &y2, &z2}) CHECK(std::abs(zeta(*f)) <= 0.02);
  CHECK(std::abs(zeta(x2 + y2) - 1.0) <= 0.02);
  CHECK(std::abs(zeta(x2 + y2 + z2) - 1.0) <= 1e-12);
}

TEST_CASE("zeta of a linear function vanishes") {
  const MeshPtr m = mesh(5);
  for (int axis = 0; axis < 3; ++axis) CHECK(std::abs(zeta(test::coord(m, axis))) <= 1e-3);
}

TEST_CASE("zeta of constants") {
  for (double c : {-3.0, 0.0, 0.5, 17.25}) CHECK(zeta(constant_field(mesh(3), c)) == c);
}

TEST_CASE("normalization, monotonicity and shifts") {
  std::mt19937_64 rng(21);
  const MeshPtr m = mesh(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField f = test::random_field(m, rng);
    const double z = zeta(f);
    CHECK(std::abs(zeta(f + 1.5) - z - 1.5) <= 1e-12);
    CHECK(std::abs(zeta(2.0 * f) - 2.0 * z) <= 1e-12);
    CHECK(zeta(f + 0.01) >= z);
    const ScalarField g = f.map([](double v) { return v + 0.1 * (v * v + 1.0); });
    CHECK(zeta(g) >= z);
  }
}

TEST_CASE("zeta is invariant under monotone reparametrization") {
  std::mt19937_64 rng(22);
  const MeshPtr m = mesh(4);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarField f = test::random_field(m, rng);
    const double z = zeta(f);
    const ScalarField g = f.map([](double v) { return v * v * v + v; });
    CHECK(std::abs(zeta(g) - (z * z * z + z)) <= 1e-12);
  }
}

TEST_CASE("flood-fill oracle agrees with the tree") {
  const MeshPtr m = mesh(4);
  const ScalarField x2 = test::square(m, 0), y2 = test::square(m, 1);
  CHECK(std::abs(zeta_bruteforce(x2, 256) - zeta(x2)) <= 1e-3);
  CHECK(std::abs(zeta_bruteforce(x2 + y2, 256) - zeta(x2 + y2)) <= 1e-3);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarField f = test::random_field(m, rng);
    CHECK(std::abs(zeta_bruteforce(f, 512) - zeta(f)) <= 1e-3);
  }
}

TEST_CASE("median splits the tree into pieces of at most half the area") {
  std::mt19937_64 rng(24);
  const MeshPtr m = mesh(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ContourTree t = build_contour_tree(test::random_field(m, rng));
    const TreePoint p = median_point(t);
    CHECK(complement_max_area(t, p) <= 0.5 * t.total_area() * (1.0 + 1e-9));
  }
}

TEST_CASE("Pi of coordinate squares") {
  const MeshPtr m = mesh(6);
  const ScalarField x2 = test::square(m, 0), y2 = test::square(m, 1), z = test::coord(m, 2);
  CHECK(std::abs(pi_functional(x2, y2) - 1.0) <= 0.05);
  CHECK(pi_functional(z, 2.0 * z) <= 1e-3);
  CHECK(pi_functional(x2, constant_field(m, 3.0)) <= 1e-12);
}

TEST_CASE("bracket inequality report") {
  SUBCASE("C = 2 for the coordinate squares") {
    QuasiStateConfig cfg;
    cfg.defect_C = 2.0;
    const MeshPtr m = mesh(6);
    const InequalityReport r = bracket_inequality_report(test::square(m, 0), test::square(m, 1), cfg);
    CHECK(r.bound == doctest::Approx(6.22).epsilon(0.01));
    CHECK(r.satisfied);
    CHECK(r.defect_C == 2.0);
  }
  SUBCASE("numeric form") {
    const InequalityReport r = bracket_inequality_report(1.0, 0.0, QuasiStateConfig{});
    CHECK(r.bound == 0.0);
    CHECK_FALSE(r.satisfied);
    CHECK(bracket_inequality_report(0.04, 0.0, QuasiStateConfig{}).satisfied);
  }
  SUBCASE("invalid inputs") {
    QuasiStateConfig bad;
    bad.defect_C = 0.0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    CHECK_THROWS_AS(bracket_inequality_report(1.0, 1.0, bad), ArgumentError);
  }
}

TEST_CASE("robustness from Pi") {
  QuasiStateConfig cfg;
  cfg.defect_C = 2.0;
  std::vector<double> eps;
  for (int k = 1; k <= 9; ++k) eps.push_back(k / 20.0);
  const RobustnessReport r = robustness_from_pi(1.0, cfg, eps);
  CHECK_FALSE(r.vacuous);
  CHECK(r.upsilon_lower == doctest::Approx(0.25));
  CHECK(r.eps_max_lower == doctest::Approx(0.5));
  REQUIRE(r.upsilon_curve.size() == eps.size());
  for (const auto& [e, u] : r.upsilon_curve)
    CHECK(u == doctest::Approx((1.0 - 2.0 * e) * (1.0 - 2.0 * e) / 4.0).epsilon(1e-12));

  const RobustnessReport v = robustness_from_pi(0.0, cfg, eps);
  CHECK(v.vacuous);
  CHECK(v.upsilon_lower == 0.0);
  CHECK(v.eps_max_lower == 0.0);
}

TEST_CASE("robustness of a commuting pair is vacuous") {
  const MeshPtr m = mesh(5);
  const ScalarField z = test::coord(m, 2);
  CHECK(robustness_report(z, 2.0 * z, QuasiStateConfig{}, {0.1}).vacuous);
  CHECK(robustness_report(z, z + 1.0, QuasiStateConfig{}, {0.1}).vacuous);
}

TEST_CASE("Pi of a commuting pair shrinks with the mesh") {
  // z and z^2 commute; the discrete defect is a mesh effect.
  double prev = 1.0;
  for (int level : {4, 5, 6}) {
    const MeshPtr m = mesh(level);
    const ScalarField z = test::coord(m, 2);
    const double p = pi_functional(z, z * z);
    CHECK(p < prev / 3.0);
    prev = p;
  }
  CHECK(prev <= 2e-4);
}

}  // TEST_SUITE
