#pragma once

// Measure-augmented contour tree of a scalar field on a genus-0 sphere mesh.
//
// Vertices are ordered by (value, index) so every field behaves as if it had
// distinct values (simulation of simplicity). Sublevel and superlevel sets are
// taken over the mesh vertex graph. Each mesh vertex lands at exactly one
// place in the tree: critical vertices become nodes, regular vertices become
// interior mass points of the edge they lie on. A vertex carries its full
// quadrature weight at its own level.

#include <iosfwd>
#include <span>
#include <vector>

#include "qstate/geometry.hpp"

namespace qstate {

enum class NodeKind { kMinimum, kMaximum, kSaddle };

const char* to_string(NodeKind kind);

struct TreeNode {
  int vertex = -1;
  double level = 0.0;
  NodeKind kind = NodeKind::kSaddle;
  double mass = 0.0;
};

struct TreeEdge {
  int lo = -1;  // node below
  int hi = -1;  // node above
  // Regular mesh vertices swept by the edge, ascending.
  std::vector<int> vertices;
  std::vector<double> levels;
  // cumulative[i] = total mass of interior points 0..i.
  std::vector<double> cumulative;

  std::size_t interior_count() const { return vertices.size(); }
  double interior_mass() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  // Mass of interior points with index < i.
  double mass_before(std::size_t i) const { return i == 0 ? 0.0 : cumulative[i - 1]; }
  double point_mass(std::size_t i) const { return cumulative[i] - mass_before(i); }
};

struct AreaSample {
  double level;
  double area;
};

// Areas of the connected pieces of {F <= c} and {F >= c}.
struct CrossSection {
  std::vector<double> sublevel_areas;
  std::vector<double> superlevel_areas;
};

class ContourTree {
 public:
  ContourTree(std::vector<TreeNode> nodes, std::vector<TreeEdge> edges);

  std::span<const TreeNode> nodes() const { return nodes_; }
  std::span<const TreeEdge> edges() const { return edges_; }
  std::span<const int> incident_edges(int node) const { return incidence_[node]; }
  int other_end(int edge, int node) const {
    return edges_[edge].lo == node ? edges_[edge].hi : edges_[edge].lo;
  }
  double total_area() const { return total_; }

  // Mass of the part of the tree that stays attached to `node` once the
  // closed edge is removed (edge interior excluded, node included).
  double side_mass(int edge, int node) const;

  // Monotone swept-area profile of an edge as (level, cumulative area)
  // samples. Node masses are folded into one incident edge each (non-maxima
  // into their first upward edge, maxima into their downward edge) so the
  // final samples of all edges sum to the total area.
  std::vector<AreaSample> area_profile(int edge) const;

  // Pieces of the sub- and superlevel sets at c, read off the tree.
  CrossSection cross_section(double c) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<int>> incidence_;
  std::vector<double> lo_side_, hi_side_;
  std::vector<int> folded_into_;  // node -> edge carrying its mass
  double total_ = 0.0;
};

// A point of the tree: a node, an interior mass point of an edge, or a gap
// between consecutive mass points of an edge.
struct TreePoint {
  enum class Kind { kNode, kEdgeMass, kEdgeGap };
  Kind kind = Kind::kNode;
  int index = 0;  // node id or edge id
  // kEdgeMass: interior index; kEdgeGap: number of interior points below.
  int slot = 0;
  double level = 0.0;

  static TreePoint node(const ContourTree& tree, int id);
  static TreePoint edge_mass(const ContourTree& tree, int edge, int slot);
  static TreePoint edge_gap(int edge, int gap, double level);
  // Point of `edge` at `level`; lands on a mass point if one sits exactly
  // there, otherwise in the gap containing the level. ArgumentError if the
  // level is outside the edge's interval.
  static TreePoint on_edge(const ContourTree& tree, int edge, double level);
};

ContourTree build_contour_tree(const ScalarField& f);

struct LevelComponent {
  std::vector<int> vertices;
  double area = 0.0;
};

struct LevelComponents {
  std::vector<LevelComponent> sublevel;
  std::vector<LevelComponent> superlevel;
};

// Direct flood fill of {F <= c} and {F >= c} over the vertex graph.
LevelComponents brute_force_components(const ScalarField& f, double c);

// Masses of the connected pieces of (tree minus point).
std::vector<double> branch_masses(const ContourTree& tree, const TreePoint& p);

double complement_max_area(const ContourTree& tree, const TreePoint& p);

// Text export: header "nodes edges", node lines "id level kind", edge lines
// "lo hi n_samples" followed by n_samples "level area" pairs.
void write_tree(std::ostream& os, const ContourTree& tree);

}  // namespace qstate
