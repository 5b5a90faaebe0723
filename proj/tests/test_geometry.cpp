#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "qstate/errors.hpp"
#include "qstate/geometry.hpp"
#include "test_support.hpp"

using namespace qstate;
using qstate::test::mesh;

TEST_SUITE("geometry") {

TEST_CASE("icosphere combinatorics per level") {
  for (int k = 0; k <= 5; ++k) {
    const MeshPtr m = mesh(k);
    const long p = 1L << (2 * k);
    CHECK(m->vertex_count() == static_cast<std::size_t>(10 * p + 2));
    CHECK(m->triangle_count() == static_cast<std::size_t>(20 * p));
    CHECK(m->edge_count() == static_cast<std::size_t>(30 * p));
    CHECK(m->euler_characteristic() == 2);
    CHECK(m->subdivision_level() == k);
  }
  CHECK(mesh(3)->vertex_count() == 642);
  CHECK(mesh(3)->triangle_count() == 1280);
}

TEST_CASE("areas and weights are normalized") {
  for (int k : {0, 2, 5}) {
    const MeshPtr m = mesh(k);
    double a = 0, w = 0;
    for (double x : m->triangle_areas()) a += x;
    for (double x : m->vertex_weights()) w += x;
    CHECK(a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& v : m->vertices()) CHECK(std::abs(norm(v) - 1.0) <= 1e-12);
  }
}

TEST_CASE("level out of range is rejected") {
  CHECK_THROWS_AS(build_icosphere(-1), ArgumentError);
  CHECK_THROWS_AS(build_icosphere(10), ArgumentError);
}

TEST_CASE("coarse vertices are a prefix of finer levels") {
  const auto a = mesh(2)->vertices();
  const auto b = mesh(4)->vertices();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("spherical triangle area of an octant") {
  const double a = spherical_triangle_area({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  CHECK(a == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
}

TEST_CASE("sampling") {
  const MeshPtr m = mesh(3);
  const ScalarField one = sample_field(m, [](const Vec3&) { return 1.0; });
  for (double v : one.values()) CHECK(v == 1.0);

  const ScalarField x2 = test::square(m, 0);
  const ScalarField xy = x2 + test::square(m, 1);
  const auto V = m->vertices();
  for (std::size_t i = 0; i < V.size(); ++i) {
    CHECK(xy[i] == doctest::Approx(1.0 - V[i].z * V[i].z).epsilon(1e-14));
    if (V[i] == Vec3{0, 0, 1}) CHECK(x2[i] == 0.0);
  }

  SUBCASE("non-finite values carry the vertex index") {
    try {
      sample_field(m, [](const Vec3& p) { return p.z > 0.99 ? 1.0 / 0.0 : 0.0; });
      FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
      CHECK(V[e.vertex()].z > 0.99);
    }
  }
}

TEST_CASE("mean, norm and oscillation") {
  const MeshPtr m = mesh(5);
  CHECK(mean_value(constant_field(m, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(mean_value(test::coord(m, 2))) <= 1e-10);
  CHECK(mean_value(test::square(m, 0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  const ScalarField z = test::coord(m, 2);
  CHECK(uniform_norm(z) == doctest::Approx(1.0));
  CHECK(oscillation(z) == doctest::Approx(2.0));
  CHECK(uniform_norm(test::square(m, 0) + (-1.0 / 3.0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(uniform_norm(constant_field(m, 0.0)) == 0.0);
  CHECK(oscillation(constant_field(m, 0.0)) == 0.0);
  CHECK(uniform_norm(z * -3.0) == doctest::Approx(3.0 * uniform_norm(z)));
}

TEST_CASE("fields on different meshes do not combine") {
  CHECK_THROWS_AS(test::coord(mesh(1), 0) + test::coord(mesh(2), 0), ArgumentError);
  CHECK_THROWS_AS(poisson_bracket(test::coord(mesh(1), 0), test::coord(mesh(2), 0)),
                  ArgumentError);
}

TEST_CASE("gradients") {
  const MeshPtr m = mesh(5);
  const VectorField gz = ambient_gradient(test::coord(m, 2));
  const VectorField g0 = ambient_gradient(constant_field(m, 2.5));
  const auto V = m->vertices();
  for (std::size_t i = 0; i < V.size(); ++i) {
    CHECK(norm(g0[i]) == doctest::Approx(0.0));
    CHECK(std::abs(dot(gz[i], V[i])) <= 1e-8);
    CHECK(norm(gz[i] - tangential({0, 0, 1}, V[i])) <= 0.02);
    if (V[i] == Vec3{1, 0, 0}) CHECK(norm(gz[i] - Vec3{0, 0, 1}) <= 0.02);
    if (V[i] == Vec3{0, 0, 1}) CHECK(norm(gz[i]) <= 1e-12);
  }
}

TEST_CASE("Hamiltonian vector field of z rotates at speed 4 pi sin(theta)") {
  const MeshPtr m = mesh(5);
  const VectorField X = hamiltonian_vector_field(test::coord(m, 2));
  const VectorField Y = hamiltonian_vector_field(constant_field(m, 1.0));
  const auto V = m->vertices();
  for (std::size_t i = 0; i < V.size(); ++i) {
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - V[i].z * V[i].z));
    CHECK(norm(X[i]) == doctest::Approx(kFourPi * sin_theta).epsilon(0.01).scale(1.0));
    CHECK(std::abs(X[i].z) <= 0.01 * kFourPi);
    CHECK(norm(Y[i]) <= 1e-12);
  }
}

TEST_CASE("flows preserve their generator to first order") {
  std::mt19937_64 rng(7);
  const MeshPtr m = mesh(4);
  const ScalarField g = test::random_field(m, rng);
  const VectorField grad = ambient_gradient(g);
  const VectorField X = hamiltonian_vector_field(grad);
  for (std::size_t i = 0; i < m->vertex_count(); ++i)
    CHECK(std::abs(dot(X[i], grad[i])) <= 1e-12 * (1.0 + norm(X[i]) * norm(grad[i])));
}

TEST_CASE("Poisson bracket identities") {
  std::mt19937_64 rng(11);
  const MeshPtr m = mesh(4);
  const ScalarField f = test::random_field(m, rng);
  const ScalarField f2 = test::random_field(m, rng);
  const ScalarField g = test::random_field(m, rng);

  const ScalarField ff = poisson_bracket(f, f);
  CHECK(uniform_norm(ff) == 0.0);
  const ScalarField fg = poisson_bracket(f, g), gf = poisson_bracket(g, f);
  CHECK(uniform_norm(fg + gf) == 0.0);

  const double a = 1.75, b = -0.5;
  const ScalarField lhs = poisson_bracket(a * f + b * f2, g);
  const ScalarField rhs = a * fg + b * poisson_bracket(f2, g);
  CHECK(uniform_norm(lhs - rhs) <= 1e-12 * uniform_norm(rhs));
}

TEST_CASE("bracket {x, y} = 4 pi z") {
  const MeshPtr m = mesh(5);
  const ScalarField b = poisson_bracket(test::coord(m, 0), test::coord(m, 1));
  CHECK(uniform_norm(b - kFourPi * test::coord(m, 2)) <= 0.01 * kFourPi);
}

TEST_CASE("sup norm of {x^2, y^2}") {
  const double exact = 16.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
  const MeshPtr m = mesh(6);
  const double n = uniform_norm(poisson_bracket(test::square(m, 0), test::square(m, 1)));
  CHECK(n == doctest::Approx(9.6745).epsilon(0.02));
  CHECK(n == doctest::Approx(exact).epsilon(0.002));
  // {x^2, y^2} = 16 pi x y z
  const ScalarField b = poisson_bracket(test::square(m, 0), test::square(m, 1));
  const ScalarField xyz = test::coord(m, 0) * test::coord(m, 1) * test::coord(m, 2);
  CHECK(uniform_norm(b - (4.0 * kFourPi) * xyz) <= 0.02 * exact);
}

TEST_CASE("discrete Leibniz defect shrinks under refinement") {
  auto defect = [](int level) {
    const MeshPtr m = mesh(level);
    const ScalarField F = test::coord(m, 0) + 0.5 * test::square(m, 2);
    const ScalarField G = test::coord(m, 1) * test::coord(m, 2);
    const ScalarField H = test::square(m, 0) + test::coord(m, 2);
    const ScalarField lhs = poisson_bracket(F * G, H);
    const ScalarField rhs = F * poisson_bracket(G, H) + G * poisson_bracket(F, H);
    return uniform_norm(lhs - rhs);
  };
  CHECK(defect(6) < defect(4));
}

TEST_CASE("bracket of trigonometric fields matches the closed form at level 6") {
  const MeshPtr m = mesh(6);
  const ScalarField F = sample_field(m, [](const Vec3& p) { return std::sin(2 * p.x + p.z); });
  const ScalarField G = sample_field(m, [](const Vec3& p) { return std::cos(p.y - p.z); });
  const ScalarField exact = sample_field(m, [](const Vec3& p) {
    const Vec3 gf = std::cos(2 * p.x + p.z) * Vec3{2, 0, 1};
    const Vec3 gg = -std::sin(p.y - p.z) * Vec3{0, 1, -1};
    return kFourPi * triple(p, gf, gg);
  });
  CHECK(uniform_norm(poisson_bracket(F, G) - exact) <= 0.02 * uniform_norm(exact));
}

TEST_CASE("point location") {
  std::mt19937_64 rng(3);
  const MeshPtr m = mesh(4);
  int hint = 0;
  for (int k = 0; k < 500; ++k) {
    const Vec3 p = test::random_unit(rng);
    const Location loc = m->locate(p, hint);
    hint = loc.triangle;
    double s = 0;
    for (double l : loc.bary) {
      CHECK(l >= -1e-12);
      s += l;
    }
    CHECK(s == doctest::Approx(1.0));
    const auto& t = m->triangles()[loc.triangle];
    const Vec3 q = loc.bary[0] * m->vertices()[t[0]] + loc.bary[1] * m->vertices()[t[1]] +
                   loc.bary[2] * m->vertices()[t[2]];
    CHECK(norm(normalized(q) - p) <= 1e-12);
  }
}

TEST_CASE("mesh text round trip") {
  const MeshPtr m = mesh(2);
  std::stringstream ss;
  write_mesh(ss, *m);
  const MeshPtr r = read_mesh(ss);
  REQUIRE(r->vertex_count() == m->vertex_count());
  REQUIRE(r->triangle_count() == m->triangle_count());
  for (std::size_t i = 0; i < m->vertex_count(); ++i) {
    CHECK(r->vertices()[i] == m->vertices()[i]);
    CHECK(r->vertex_weights()[i] == m->vertex_weights()[i]);
  }
  CHECK(r->subdivision_level() == 2);
}

TEST_CASE("malformed meshes are rejected") {
  const MeshPtr m = mesh(1);
  std::vector<Vec3> v(m->vertices().begin(), m->vertices().end());
  std::vector<Triangle> t(m->triangles().begin(), m->triangles().end());
  std::vector<double> a(m->triangle_areas().begin(), m->triangle_areas().end());
  std::vector<double> w(m->vertex_weights().begin(), m->vertex_weights().end());

  SUBCASE("vertex off the sphere") {
    auto v2 = v;
    v2[0] = 1.01 * v2[0];
    CHECK_THROWS_AS(SphereMesh(v2, t, a, w, 1), MeshError);
  }
  SUBCASE("areas not summing to one") {
    auto a2 = a;
    a2[0] *= 2.0;
    CHECK_THROWS_AS(SphereMesh(v, t, a2, w, 1), MeshError);
  }
  SUBCASE("missing triangle") {
    auto t2 = t;
    auto a2 = a;
    a2[1] += a2[0];
    t2.erase(t2.begin());
    a2.erase(a2.begin());
    CHECK_THROWS(SphereMesh(v, t2, a2, w, 1));
  }
  SUBCASE("truncated text") {
    std::stringstream ss;
    write_mesh(ss, *m);
    std::string s = ss.str();
    std::stringstream cut(s.substr(0, s.size() / 2));
    CHECK_THROWS(read_mesh(cut));
  }
}

}  // TEST_SUITE
