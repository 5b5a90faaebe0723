#include "qstate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "qstate/errors.hpp"

namespace qstate {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kSumTolerance = 1e-10;
constexpr double kDegenerateArea = 1e-14;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

void check_same_mesh(const ScalarField& a, const ScalarField& b) {
  if (!a.same_mesh(b)) throw ArgumentError("fields live on different meshes");
}

}  // namespace

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double ea = geodesic_distance(b, c);
  const double eb = geodesic_distance(c, a);
  const double ec = geodesic_distance(a, b);
  const double s = 0.5 * (ea + eb + ec);
  const double t = std::tan(0.5 * s) * std::tan(0.5 * (s - ea)) *
                   std::tan(0.5 * (s - eb)) * std::tan(0.5 * (s - ec));
  return 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
}

// ---------------------------------------------------------------------------
// SphereMesh

SphereMesh::SphereMesh(std::vector<Vec3> vertices,
                       std::vector<Triangle> triangles,
                       std::vector<double> triangle_areas,
                       std::vector<double> vertex_weights,
                       int subdivision_level)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      triangle_areas_(std::move(triangle_areas)),
      vertex_weights_(std::move(vertex_weights)),
      level_(subdivision_level) {
  const auto nv = static_cast<int>(vertices_.size());
  if (nv < 4 || triangles_.empty())
    throw MeshError("mesh needs at least 4 vertices and one triangle");
  if (triangle_areas_.size() != triangles_.size())
    throw MeshError("triangle area count does not match triangle count");
  if (vertex_weights_.size() != vertices_.size())
    throw MeshError("vertex weight count does not match vertex count");

  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (std::abs(norm(vertices_[i]) - 1.0) > kUnitTolerance)
      throw MeshError("vertex " + std::to_string(i) + " is not on the unit sphere");
  }
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= nv) throw MeshError("triangle index out of range");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    const Vec3& a = vertices_[tri[0]];
    const Vec3& b = vertices_[tri[1]];
    const Vec3& c = vertices_[tri[2]];
    const Vec3 n = cross(b - a, c - a);
    if (0.5 * norm(n) < kDegenerateArea)
      throw MeshError("triangle " + std::to_string(t) + " is degenerate");
    if (dot(n, a + b + c) <= 0.0)
      throw MeshError("triangle " + std::to_string(t) + " is not oriented outward");
    if (!(triangle_areas_[t] >= 0.0))
      throw MeshError("negative triangle area");
  }
  const double area_sum =
      std::accumulate(triangle_areas_.begin(), triangle_areas_.end(), 0.0);
  if (std::abs(area_sum - 1.0) > kSumTolerance)
    throw MeshError("triangle areas do not sum to 1");
  for (double w : vertex_weights_)
    if (!(w >= 0.0)) throw MeshError("negative vertex weight");
  const double weight_sum =
      std::accumulate(vertex_weights_.begin(), vertex_weights_.end(), 0.0);
  if (std::abs(weight_sum - 1.0) > kSumTolerance)
    throw MeshError("vertex weights do not sum to 1");

  build_adjacency();
  if (euler_characteristic() != 2)
    throw TopologyError("mesh is not a genus-0 surface (Euler characteristic " +
                        std::to_string(euler_characteristic()) + ")");
}

void SphereMesh::build_adjacency() {
  const auto nv = vertices_.size();
  const auto nt = triangles_.size();

  // vertex -> incident triangles
  inc_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++inc_offsets_[v + 1];
  std::partial_sum(inc_offsets_.begin(), inc_offsets_.end(), inc_offsets_.begin());
  inc_.resize(inc_offsets_.back());
  {
    std::vector<int> fill(inc_offsets_.begin(), inc_offsets_.end() - 1);
    for (std::size_t t = 0; t < nt; ++t)
      for (int v : triangles_[t]) inc_[fill[v]++] = static_cast<int>(t);
  }

  // Triangle across each edge. A closed oriented surface has every directed
  // edge (a, b) matched by exactly one (b, a) in a neighbouring triangle.
  tri_neighbors_.assign(nt, {-1, -1, -1});
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      int found = -1;
      for (int u : incident_triangles(b)) {
        if (u == static_cast<int>(t)) continue;
        const auto& o = triangles_[u];
        for (int j = 0; j < 3; ++j) {
          if (o[j] == b && o[(j + 1) % 3] == a) {
            if (found != -1) throw TopologyError("edge shared by more than two triangles");
            found = u;
          }
        }
      }
      if (found == -1)
        throw TopologyError("mesh is not a closed consistently oriented surface");
      tri_neighbors_[t][k] = found;
    }
  }

  // vertex graph
  std::vector<std::vector<int>> nbrs(nv);
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (a < b) {
        nbrs[a].push_back(b);
        nbrs[b].push_back(a);
      }
    }
  }
  nbr_offsets_.assign(nv + 1, 0);
  edge_count_ = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    std::sort(nbrs[v].begin(), nbrs[v].end());
    nbrs[v].erase(std::unique(nbrs[v].begin(), nbrs[v].end()), nbrs[v].end());
    nbr_offsets_[v + 1] = nbr_offsets_[v] + static_cast<int>(nbrs[v].size());
    edge_count_ += nbrs[v].size();
  }
  edge_count_ /= 2;
  nbr_.reserve(nbr_offsets_.back());
  for (auto& list : nbrs) nbr_.insert(nbr_.end(), list.begin(), list.end());

  max_edge_length_ = 0.0;
  for (std::size_t v = 0; v < nv; ++v)
    for (int u : neighbors(static_cast<int>(v)))
      max_edge_length_ = std::max(max_edge_length_, norm(vertices_[v] - vertices_[u]));
}

long SphereMesh::euler_characteristic() const {
  return static_cast<long>(vertices_.size()) - static_cast<long>(edge_count_) +
         static_cast<long>(triangles_.size());
}

std::span<const int> SphereMesh::neighbors(int v) const {
  return {nbr_.data() + nbr_offsets_[v],
          static_cast<std::size_t>(nbr_offsets_[v + 1] - nbr_offsets_[v])};
}

std::span<const int> SphereMesh::incident_triangles(int v) const {
  return {inc_.data() + inc_offsets_[v],
          static_cast<std::size_t>(inc_offsets_[v + 1] - inc_offsets_[v])};
}

std::array<double, 3> SphereMesh::barycentric(int t, const Vec3& p) const {
  const auto& tri = triangles_[t];
  const Vec3& a = vertices_[tri[0]];
  const Vec3& b = vertices_[tri[1]];
  const Vec3& c = vertices_[tri[2]];
  const double la = triple(p, b, c);
  const double lb = triple(p, c, a);
  const double lc = triple(p, a, b);
  const double s = la + lb + lc;
  return {la / s, lb / s, lc / s};
}

Location SphereMesh::locate(const Vec3& p, int hint) const {
  constexpr double kInside = -1e-13;
  const int nt = static_cast<int>(triangles_.size());
  int t = (hint >= 0 && hint < nt) ? hint : 0;
  const int max_steps = 64 + 4 * static_cast<int>(std::sqrt(static_cast<double>(nt)));
  for (int step = 0; step < max_steps; ++step) {
    const auto& tri = triangles_[t];
    const double l[3] = {triple(p, vertices_[tri[1]], vertices_[tri[2]]),
                         triple(p, vertices_[tri[2]], vertices_[tri[0]]),
                         triple(p, vertices_[tri[0]], vertices_[tri[1]])};
    int worst = 0;
    for (int k = 1; k < 3; ++k)
      if (l[k] < l[worst]) worst = k;
    const double s = l[0] + l[1] + l[2];
    if (s > 0.0 && l[worst] >= kInside * s) {
      return {t, {l[0] / s, l[1] / s, l[2] / s}};
    }
    t = tri_neighbors_[t][worst];
  }
  // The walk can cycle on badly shaped input; scan everything instead.
  for (int u = 0; u < nt; ++u) {
    const auto bary = barycentric(u, p);
    const auto& tri = triangles_[u];
    const double s = triple(p, vertices_[tri[1]], vertices_[tri[2]]) +
                     triple(p, vertices_[tri[2]], vertices_[tri[0]]) +
                     triple(p, vertices_[tri[0]], vertices_[tri[1]]);
    if (s > 0.0 && *std::min_element(bary.begin(), bary.end()) >= kInside)
      return {u, bary};
  }
  std::ostringstream msg;
  msg << "point " << p << " could not be located on the mesh";
  throw GeometryError(msg.str());
}

// ---------------------------------------------------------------------------
// Icosphere

MeshPtr build_icosphere(int level) {
  if (level < 0 || level > kMaxSubdivisionLevel)
    throw ArgumentError("subdivision level must be in [0, " +
                        std::to_string(kMaxSubdivisionLevel) + "], got " +
                        std::to_string(level));

  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> verts;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      verts.push_back(normalized({s1, s2 * phi, 0.0}));
      verts.push_back(normalized({0.0, s1, s2 * phi}));
      verts.push_back(normalized({s2 * phi, 0.0, s1}));
    }
  }
  // Faces are the vertex triples at mutual edge distance; orient outward.
  double min_dist = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j)
      min_dist = std::min(min_dist, norm(verts[i] - verts[j]));
  auto adjacent = [&](int i, int j) {
    return norm(verts[i] - verts[j]) < min_dist * (1.0 + 1e-9);
  };
  std::vector<Triangle> tris;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      for (int k = j + 1; k < 12; ++k)
        if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) {
          if (triple(verts[i], verts[j], verts[k]) > 0.0)
            tris.push_back({i, j, k});
          else
            tris.push_back({i, k, j});
        }

  for (int l = 0; l < level; ++l) {
    std::unordered_map<std::uint64_t, int> midpoints;
    midpoints.reserve(tris.size() * 2);
    auto midpoint = [&](int a, int b) {
      const auto key = edge_key(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      const int id = static_cast<int>(verts.size());
      verts.push_back(normalized(verts[a] + verts[b]));
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(tris.size() * 4);
    for (const auto& [a, b, c] : tris) {
      const int ab = midpoint(a, b);
      const int bc = midpoint(b, c);
      const int ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({ab, b, bc});
      next.push_back({ca, bc, c});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  std::vector<double> areas(tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& [a, b, c] = tris[t];
    areas[t] = spherical_triangle_area(verts[a], verts[b], verts[c]) / kFourPi;
  }
  // Renormalize away the rounding in the excess sum; the correction is
  // O(1e-15) relative.
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  for (double& a : areas) a /= total;

  std::vector<double> weights(verts.size(), 0.0);
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int v : tris[t]) weights[v] += areas[t] / 3.0;

  return std::make_shared<const SphereMesh>(std::move(verts), std::move(tris),
                                            std::move(areas), std::move(weights),
                                            level);
}

// ---------------------------------------------------------------------------
// Fields

ScalarField::ScalarField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw ArgumentError("scalar field without a mesh");
  if (values_.size() != mesh_->vertex_count())
    throw ArgumentError("scalar field has " + std::to_string(values_.size()) +
                        " values for " + std::to_string(mesh_->vertex_count()) +
                        " vertices");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw EvaluationError("non-finite field value at vertex " + std::to_string(i),
                            static_cast<int>(i));
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  check_same_mesh(*this, o);
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + o.values_[i];
  return {mesh_, std::move(out)};
}

ScalarField ScalarField::operator-(const ScalarField& o) const {
  check_same_mesh(*this, o);
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - o.values_[i];
  return {mesh_, std::move(out)};
}

ScalarField ScalarField::operator*(const ScalarField& o) const {
  check_same_mesh(*this, o);
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] * o.values_[i];
  return {mesh_, std::move(out)};
}

ScalarField ScalarField::operator*(double s) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * values_[i];
  return {mesh_, std::move(out)};
}

ScalarField ScalarField::operator+(double c) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + c;
  return {mesh_, std::move(out)};
}

ScalarField ScalarField::map(const std::function<double(double)>& u) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u(values_[i]);
  return {mesh_, std::move(out)};
}

VectorField::VectorField(MeshPtr mesh, std::vector<Vec3> vectors)
    : mesh_(std::move(mesh)), vectors_(std::move(vectors)) {
  if (!mesh_) throw ArgumentError("vector field without a mesh");
  if (vectors_.size() != mesh_->vertex_count())
    throw ArgumentError("vector field size does not match vertex count");
}

ScalarField sample_field(const MeshPtr& mesh, const FieldFunction& f) {
  const auto verts = mesh->vertices();
  std::vector<double> values(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    values[i] = f(verts[i]);
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "field evaluates to " << values[i] << " at vertex " << i << ' ' << verts[i];
      throw EvaluationError(msg.str(), static_cast<int>(i));
    }
  }
  return {mesh, std::move(values)};
}

ScalarField constant_field(const MeshPtr& mesh, double c) {
  return {mesh, std::vector<double>(mesh->vertex_count(), c)};
}

double mean_value(const ScalarField& f) {
  const auto w = f.mesh()->vertex_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * w[i];
  return sum;
}

double uniform_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double oscillation(const ScalarField& f) {
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  return *hi - *lo;
}

VectorField ambient_gradient(const ScalarField& f) {
  const SphereMesh& mesh = *f.mesh();
  const auto verts = mesh.vertices();
  const auto tris = mesh.triangles();
  const auto areas = mesh.triangle_areas();

  std::vector<Vec3> acc(verts.size());
  std::vector<double> wsum(verts.size(), 0.0);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& [ia, ib, ic] = tris[t];
    const Vec3& a = verts[ia];
    const Vec3& b = verts[ib];
    const Vec3& c = verts[ic];
    const Vec3 n = cross(b - a, c - a);
    const double n2 = dot(n, n);
    if (0.5 * std::sqrt(n2) < kDegenerateArea)
      throw MeshError("degenerate triangle " + std::to_string(t));
    // grad(lambda_a) = n x (c - b) / |n|^2, and cyclically.
    const Vec3 g = (f[ia] * cross(n, c - b) + f[ib] * cross(n, a - c) +
                    f[ic] * cross(n, b - a)) /
                   n2;
    for (int v : tris[t]) {
      acc[v] += areas[t] * g;
      wsum[v] += areas[t];
    }
  }
  for (std::size_t v = 0; v < verts.size(); ++v)
    acc[v] = tangential(acc[v] / wsum[v], verts[v]);
  return {f.mesh(), std::move(acc)};
}

VectorField hamiltonian_vector_field(const VectorField& gradient) {
  const auto verts = gradient.mesh()->vertices();
  std::vector<Vec3> out(verts.size());
  for (std::size_t v = 0; v < verts.size(); ++v)
    out[v] = kFourPi * cross(gradient[v], verts[v]);
  return {gradient.mesh(), std::move(out)};
}

VectorField hamiltonian_vector_field(const ScalarField& g) {
  return hamiltonian_vector_field(ambient_gradient(g));
}

ScalarField poisson_bracket(const VectorField& grad_f, const VectorField& grad_g) {
  if (grad_f.mesh() != grad_g.mesh())
    throw ArgumentError("fields live on different meshes");
  const auto verts = grad_f.mesh()->vertices();
  std::vector<double> out(verts.size());
  for (std::size_t v = 0; v < verts.size(); ++v)
    out[v] = kFourPi * triple(verts[v], grad_f[v], grad_g[v]);
  return {grad_f.mesh(), std::move(out)};
}

ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g) {
  check_same_mesh(f, g);
  return poisson_bracket(ambient_gradient(f), ambient_gradient(g));
}

// ---------------------------------------------------------------------------
// Mesh I/O

void write_mesh(std::ostream& os, const SphereMesh& mesh) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << mesh.vertex_count() << ' ' << mesh.triangle_count() << ' '
     << mesh.subdivision_level() << '\n';
  const auto verts = mesh.vertices();
  const auto w = mesh.vertex_weights();
  for (std::size_t i = 0; i < verts.size(); ++i)
    os << verts[i].x << ' ' << verts[i].y << ' ' << verts[i].z << ' ' << w[i] << '\n';
  const auto tris = mesh.triangles();
  const auto areas = mesh.triangle_areas();
  for (std::size_t t = 0; t < tris.size(); ++t)
    os << tris[t][0] << ' ' << tris[t][1] << ' ' << tris[t][2] << ' ' << areas[t] << '\n';
  os.flags(flags);
  os.precision(prec);
}

MeshPtr read_mesh(std::istream& is) {
  long nv = 0, nt = 0;
  int level = 0;
  if (!(is >> nv >> nt >> level) || nv <= 0 || nt <= 0)
    throw MeshError("bad mesh header: expected 'V F level'");
  std::vector<Vec3> verts(nv);
  std::vector<double> weights(nv);
  for (long i = 0; i < nv; ++i)
    if (!(is >> verts[i].x >> verts[i].y >> verts[i].z >> weights[i]))
      throw MeshError("truncated vertex line " + std::to_string(i));
  std::vector<Triangle> tris(nt);
  std::vector<double> areas(nt);
  for (long t = 0; t < nt; ++t)
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2] >> areas[t]))
      throw MeshError("truncated triangle line " + std::to_string(t));
  return std::make_shared<const SphereMesh>(std::move(verts), std::move(tris),
                                            std::move(areas), std::move(weights),
                                            level);
}

}  // namespace qstate
