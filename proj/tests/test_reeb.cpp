#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "qstate/errors.hpp"
#include "qstate/reeb.hpp"
#include "test_support.hpp"

using namespace qstate;
using qstate::test::mesh;

namespace {

ScalarField two_bumps(const MeshPtr& m) {
  const Vec3 a = normalized(Vec3{1, 0, 0.2}), b = normalized(Vec3{-1, 0.1, 0.2});
  return sample_field(m, [&](const Vec3& p) {
    return std::exp(-8.0 * (1.0 - dot(p, a))) + 0.8 * std::exp(-8.0 * (1.0 - dot(p, b)));
  });
}

int count_kind(const ContourTree& t, NodeKind k) {
  return static_cast<int>(std::count_if(t.nodes().begin(), t.nodes().end(),
                                        [k](const TreeNode& n) { return n.kind == k; }));
}

std::vector<double> sorted_areas(const std::vector<LevelComponent>& cs) {
  std::vector<double> out;
  for (const auto& c : cs) out.push_back(c.area);
  std::sort(out.begin(), out.end());
  return out;
}

void check_tree_invariants(const ContourTree& t) {
  CHECK(t.edges().size() + 1 == t.nodes().size());
  CHECK(t.total_area() == doctest::Approx(1.0).epsilon(1e-10));
  double sum = 0.0;
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const auto& edge = t.edges()[e];
    CHECK(t.nodes()[edge.lo].level <= t.nodes()[edge.hi].level);
    CHECK(std::is_sorted(edge.levels.begin(), edge.levels.end()));
    const auto prof = t.area_profile(static_cast<int>(e));
    for (std::size_t i = 1; i < prof.size(); ++i) {
      CHECK(prof[i].level >= prof[i - 1].level);
      CHECK(prof[i].area >= prof[i - 1].area);
    }
    if (!prof.empty()) sum += prof.back().area;
  }
  CHECK(sum == doctest::Approx(t.total_area()).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("reeb") {

TEST_CASE("height function has one edge from the south to the north pole") {
  const MeshPtr m = mesh(5);
  const ContourTree t = build_contour_tree(test::coord(m, 2));
  REQUIRE(t.nodes().size() == 2);
  REQUIRE(t.edges().size() == 1);
  CHECK(count_kind(t, NodeKind::kMinimum) == 1);
  CHECK(count_kind(t, NodeKind::kMaximum) == 1);
  CHECK(t.nodes()[t.edges()[0].lo].level == doctest::Approx(-1.0));
  CHECK(t.nodes()[t.edges()[0].hi].level == doctest::Approx(1.0));
  check_tree_invariants(t);

  // Archimedes: area of {z <= c} is (1 + c) / 2, up to one ring of vertices.
  const double ring = m->max_edge_length() / 2.0;
  for (const auto& s : t.area_profile(0)) CHECK(std::abs(s.area - (1.0 + s.level) / 2.0) <= ring);
}

TEST_CASE("constant field gives a valid tree at a single level") {
  // Index tie-breaking makes the constant field look like a generic one.
  const ContourTree t = build_contour_tree(constant_field(mesh(3), 0.25));
  check_tree_invariants(t);
  for (const auto& n : t.nodes()) CHECK(n.level == 0.25);
}

TEST_CASE("two bumps give a tree with two maxima joined at a saddle") {
  const ContourTree t = build_contour_tree(two_bumps(mesh(5)));
  CHECK(t.nodes().size() == 4);
  CHECK(t.edges().size() == 3);
  CHECK(count_kind(t, NodeKind::kMaximum) == 2);
  CHECK(count_kind(t, NodeKind::kMinimum) == 1);
  CHECK(count_kind(t, NodeKind::kSaddle) == 1);
  check_tree_invariants(t);
}

TEST_CASE("flood fill of x^2 at level 1/4") {
  const LevelComponents c = brute_force_components(test::square(mesh(5), 0), 0.25);
  CHECK(c.sublevel.size() == 1);
  CHECK(c.superlevel.size() == 2);
  // {|x| <= 1/2} is a band of area 1/2; each cap {x >= 1/2} has area 1/4.
  CHECK(c.sublevel[0].area == doctest::Approx(0.5).epsilon(0.01));
  for (const auto& s : c.superlevel) CHECK(s.area == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("cross sections agree with flood fills") {
  std::mt19937_64 rng(5);
  const MeshPtr m = mesh(4);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarField f = test::random_field(m, rng);
    const ContourTree t = build_contour_tree(f);
    check_tree_invariants(t);
    const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
    for (int k = 1; k < 10; ++k) {
      // Levels strictly between vertex values, so ties play no role.
      double c = *lo + (*hi - *lo) * k / 10.0;
      c = std::nextafter(c, *hi);
      const CrossSection cs = t.cross_section(c);
      const LevelComponents bf = brute_force_components(f, c);
      const auto sub = sorted_areas(bf.sublevel), sup = sorted_areas(bf.superlevel);
      REQUIRE(cs.sublevel_areas.size() == sub.size());
      REQUIRE(cs.superlevel_areas.size() == sup.size());
      for (std::size_t i = 0; i < sub.size(); ++i)
        CHECK(std::abs(cs.sublevel_areas[i] - sub[i]) <= 1e-8);
      for (std::size_t i = 0; i < sup.size(); ++i)
        CHECK(std::abs(cs.superlevel_areas[i] - sup[i]) <= 1e-8);
    }
  }
}

TEST_CASE("branch masses around a point sum to the total") {
  std::mt19937_64 rng(9);
  const MeshPtr m = mesh(4);
  const ContourTree t = build_contour_tree(test::random_field(m, rng));
  for (int n = 0; n < static_cast<int>(t.nodes().size()); ++n) {
    const auto b = branch_masses(t, TreePoint::node(t, n));
    const double s = std::accumulate(b.begin(), b.end(), 0.0) + t.nodes()[n].mass;
    CHECK(s == doctest::Approx(t.total_area()).epsilon(1e-12));
    CHECK(b.size() == t.incident_edges(n).size());
  }
  for (int e = 0; e < static_cast<int>(t.edges().size()); ++e) {
    const auto& edge = t.edges()[e];
    const auto gap = branch_masses(t, TreePoint::edge_gap(e, 0, edge.levels.empty()
                                                                    ? t.nodes()[edge.hi].level
                                                                    : edge.levels[0]));
    REQUIRE(gap.size() == 2);
    CHECK(gap[0] + gap[1] == doctest::Approx(t.total_area()).epsilon(1e-12));
  }
}

TEST_CASE("complement of the equator point of z splits in halves") {
  const MeshPtr m = mesh(5);
  const ContourTree t = build_contour_tree(test::coord(m, 2));
  const TreePoint mid = TreePoint::on_edge(t, 0, 0.0);
  CHECK(complement_max_area(t, mid) == doctest::Approx(0.5).epsilon(0.01));
  // At a pole almost everything lies on one side.
  const TreePoint top = TreePoint::node(t, t.edges()[0].hi);
  CHECK(complement_max_area(t, top) > 0.99);
  CHECK_THROWS_AS(TreePoint::on_edge(t, 0, 2.0), ArgumentError);
}

TEST_CASE("tree text export") {
  const ContourTree t = build_contour_tree(two_bumps(mesh(3)));
  std::ostringstream os;
  write_tree(os, t);
  std::istringstream is(os.str());
  std::size_t n = 0, e = 0;
  is >> n >> e;
  CHECK(n == t.nodes().size());
  CHECK(e == t.edges().size());
}

}  // TEST_SUITE
