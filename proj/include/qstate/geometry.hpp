#pragma once

// Triangulated unit sphere with the normalized area form (total area 1), the
// scalar and tangent vector fields living on its vertices, and the discrete
// differential operators used throughout: P1 gradients, Hamiltonian vector
// fields and the Poisson bracket.
//
// Area form convention: omega = (standard area form) / (4 pi). With this
// choice sgrad G = 4 pi (grad G x p) and {F, G} = 4 pi <p, grad F x grad G>,
// so that {F, G} = dF(sgrad G). The factor 4 pi appears only in
// hamiltonian_vector_field() and poisson_bracket().

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "qstate/vec3.hpp"

namespace qstate {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;
inline constexpr int kMaxSubdivisionLevel = 9;

using Triangle = std::array<int, 3>;

// Result of locating a point in the mesh: the containing triangle and the
// central-projection barycentric coordinates of the point in it.
struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
};

class SphereMesh {
 public:
  // Validates every invariant (unit vertices, area and weight sums, Euler
  // characteristic 2, outward orientation) and builds adjacency. Throws
  // MeshError or TopologyError.
  SphereMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
             std::vector<double> triangle_areas,
             std::vector<double> vertex_weights, int subdivision_level);

  std::span<const Vec3> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const double> triangle_areas() const { return triangle_areas_; }
  std::span<const double> vertex_weights() const { return vertex_weights_; }
  int subdivision_level() const { return level_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  long euler_characteristic() const;

  // Mesh-graph neighbours of a vertex (edge connectivity).
  std::span<const int> neighbors(int v) const;
  std::span<const int> incident_triangles(int v) const;
  // Triangle across the edge opposite corner k of triangle t.
  int triangle_neighbor(int t, int k) const { return tri_neighbors_[t][k]; }

  // Central-projection barycentric coordinates of p in triangle t. All three
  // are nonnegative iff p lies in the spherical triangle.
  std::array<double, 3> barycentric(int t, const Vec3& p) const;

  // Visibility walk starting from `hint`; falls back to a linear scan when
  // the walk does not settle. Throws GeometryError if nothing contains p.
  Location locate(const Vec3& p, int hint = 0) const;

  // Length of the longest mesh edge (chord length).
  double max_edge_length() const { return max_edge_length_; }

 private:
  void build_adjacency();

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> triangle_areas_;
  std::vector<double> vertex_weights_;
  int level_ = 0;

  std::size_t edge_count_ = 0;
  std::vector<int> nbr_offsets_, nbr_;
  std::vector<int> inc_offsets_, inc_;
  std::vector<std::array<int, 3>> tri_neighbors_;
  double max_edge_length_ = 0.0;
};

using MeshPtr = std::shared_ptr<const SphereMesh>;

// Icosahedron subdivided `level` times (0..9), vertices projected to the unit
// sphere. New vertices are appended, so the first 10*4^k+2 vertices of a
// level-L mesh are exactly the level-k vertices for k <= L.
MeshPtr build_icosphere(int level);

// Spherical excess of the triangle (a, b, c) by l'Huilier's formula.
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// One real per mesh vertex.
class ScalarField {
 public:
  ScalarField(MeshPtr mesh, std::vector<double> values);

  const MeshPtr& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  // Pointwise combinations; both operands must share the mesh.
  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(const ScalarField& o) const;
  ScalarField operator*(double s) const;
  ScalarField operator+(double c) const;
  friend ScalarField operator*(double s, const ScalarField& f) { return f * s; }
  ScalarField map(const std::function<double(double)>& u) const;

  bool same_mesh(const ScalarField& o) const { return mesh_ == o.mesh_; }

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

// One tangent vector per vertex.
class VectorField {
 public:
  VectorField(MeshPtr mesh, std::vector<Vec3> vectors);

  const MeshPtr& mesh() const { return mesh_; }
  std::span<const Vec3> vectors() const { return vectors_; }
  const Vec3& operator[](std::size_t i) const { return vectors_[i]; }

 private:
  MeshPtr mesh_;
  std::vector<Vec3> vectors_;
};

using FieldFunction = std::function<double(const Vec3&)>;

// values[i] = f(vertices[i]); throws EvaluationError on a non-finite value.
ScalarField sample_field(const MeshPtr& mesh, const FieldFunction& f);
ScalarField constant_field(const MeshPtr& mesh, double c);

double mean_value(const ScalarField& f);
double uniform_norm(const ScalarField& f);
double oscillation(const ScalarField& f);

// P1 gradients per triangle, area-weighted to vertices, then projected to
// the tangent planes. Throws MeshError on a degenerate triangle.
VectorField ambient_gradient(const ScalarField& f);

VectorField hamiltonian_vector_field(const ScalarField& g);
VectorField hamiltonian_vector_field(const VectorField& gradient);

ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g);
// Same bracket from precomputed gradients (used for many-pair sweeps).
ScalarField poisson_bracket(const VectorField& grad_f,
                            const VectorField& grad_g);

// Plain-text mesh exchange: header "V F level", V lines "x y z w", F lines
// "i j k area"; reals with 17 significant digits.
void write_mesh(std::ostream& os, const SphereMesh& mesh);
MeshPtr read_mesh(std::istream& is);

}  // namespace qstate
