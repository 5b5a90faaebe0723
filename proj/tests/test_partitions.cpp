#include <cmath>

#include "doctest.h"
#include "qstate/errors.hpp"
#include "qstate/partitions.hpp"
#include "qstate/quasistate.hpp"
#include "test_support.hpp"

using namespace qstate;
using qstate::test::mesh;

TEST_SUITE("partitions") {

TEST_CASE("cap bump profile") {
  const Vec3 c{0, 0, 1};
  CHECK(cap_bump(c, c, 0.5) == 1.0);
  CHECK(cap_bump({1, 0, 0}, c, 0.5) == 0.0);
  const Vec3 p{std::sin(0.25), 0, std::cos(0.25)};
  CHECK(cap_bump(p, c, 0.5) == doctest::Approx(std::pow(1.0 - 0.25, 3)));
  CHECK(cap_bump(p, 3.0 * c, 0.5) == doctest::Approx(cap_bump(p, c, 0.5)));
  CHECK_THROWS_AS(cap_bump(p, c, 0.0), ArgumentError);
}

TEST_CASE("caps") {
  const SupportCap a{{0, 0, 1}, std::numbers::pi / 2};
  CHECK(a.area() == doctest::Approx(0.5));
  const SupportCap b{{0, 0, -1}, 0.3}, c{{1, 0, 0}, 0.3};
  CHECK(b.disjoint_from(c));
  CHECK_FALSE(a.disjoint_from(c));
}

TEST_CASE("Fibonacci lattice") {
  const auto pts = fibonacci_lattice(16);
  REQUIRE(pts.size() == 16);
  for (int i = 0; i < 16; ++i) {
    CHECK(norm(pts[i]) == doctest::Approx(1.0));
    CHECK(pts[i].z == doctest::Approx(1.0 - (2.0 * i + 1.0) / 16.0));
  }
}

TEST_CASE("too small partitions are rejected") {
  CHECK_THROWS_AS(build_cap_partition(mesh(3), 1, 0.3), ConstructionError);
  CHECK_THROWS_AS(build_cap_partition(mesh(3), 8, 0.0), ArgumentError);
  CHECK_THROWS_AS(build_cap_partition(mesh(3), 8, 1.0), ArgumentError);
}

TEST_CASE("eight caps form a partition of unity") {
  const MeshPtr m = mesh(4);
  const PartitionOfUnity p = build_cap_partition(m, 8, 0.3);
  REQUIRE(p.N() == 8);
  CHECK_NOTHROW(p.validate());
  for (std::size_t v = 0; v < m->vertex_count(); ++v) {
    double s = 0.0;
    for (const auto& r : p.members) {
      CHECK(r[v] >= 0.0);
      s += r[v];
    }
    CHECK(s >= 1.0 - 1e-9);
  }
  for (const auto& c : p.support_caps) CHECK(c.area() < 0.5);
}

TEST_CASE("members vanish on half the sphere") {
  const MeshPtr m = mesh(5);
  const PartitionOfUnity p = build_cap_partition(m, 8, 0.3);
  for (const auto& r : p.members) CHECK(zeta(r) == 0.0);
}

TEST_CASE("validation catches broken partitions") {
  const MeshPtr m = mesh(3);
  PartitionOfUnity p = build_cap_partition(m, 8, 0.3);
  p.members[0] = p.members[0] * 0.0;
  CHECK_THROWS_AS(p.validate(), ConstructionError);
}

TEST_CASE("disjoint caps have zero bracket") {
  const MeshPtr m = mesh(4);
  const std::vector<SupportCap> caps{{{0, 0, 1}, 0.4}, {{0, 0, -1}, 0.4}};
  PartitionOfUnity p;
  for (const auto& c : caps) {
    p.support_caps.push_back(c);
    p.amplitudes.push_back(1.0);
    p.members.push_back(sample_field(m, [&](const Vec3& x) { return cap_bump(x, c.center, c.radius); }));
  }
  CHECK(max_pairwise_bracket(p) == 0.0);
}

TEST_CASE("duplication scales the bracket by 1/m^2") {
  const MeshPtr m = mesh(4);
  const PartitionOfUnity p = build_cap_partition(m, 8, 0.3);
  const double a = max_pairwise_bracket(p);
  CHECK(a > 0.0);
  CHECK(max_pairwise_bracket(duplicate_partition(p, 1)) == a);
  const PartitionOfUnity d = duplicate_partition(p, 2);
  CHECK(d.N() == 16);
  CHECK(max_pairwise_bracket(d) == doctest::Approx(a / 4.0).epsilon(1e-12));
  CHECK_THROWS_AS(duplicate_partition(p, 0), ArgumentError);
}

TEST_CASE("discrete bracket tracks the closed form") {
  const BracketSummary s = bracket_summary(build_cap_partition(mesh(5), 8, 0.3));
  CHECK(s.pairs_evaluated > 0);
  CHECK(s.discretization_error < 0.1 * s.max_bracket);
}

TEST_CASE("lower bound on the pairwise bracket") {
  QuasiStateConfig cfg;
  CHECK(proof_lower_bound(2, cfg) == doctest::Approx(1.0));
  CHECK(proof_lower_bound(3, cfg) == doctest::Approx(0.1716).epsilon(1e-3));
  cfg.defect_C = 1.0;
  const int N = 100000;
  CHECK(proof_lower_bound(N, cfg) * std::pow(N, 3) == doctest::Approx(9.0 / 8.0).epsilon(1e-3));
  CHECK_THROWS_AS(proof_lower_bound(1, cfg), ArgumentError);
}

TEST_CASE("scaling experiment rows and slopes") {
  const ExperimentResult r = scaling_experiment(mesh(4), {8, 16}, {1, 2, 4}, QuasiStateConfig{});
  REQUIRE(r.rows.size() == 6);
  REQUIRE(r.slopes.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.N_eff == row.N * row.m);
    CHECK(row.satisfied);
  }
  for (double s : r.slopes) CHECK(s == doctest::Approx(-2.0).epsilon(1e-6));
  const ExperimentResult one = scaling_experiment(mesh(3), {8}, {1}, QuasiStateConfig{});
  CHECK(std::isnan(one.slopes[0]));
}

}  // TEST_SUITE
