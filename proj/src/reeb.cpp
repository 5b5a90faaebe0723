#include "qstate/reeb.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "qstate/errors.hpp"

namespace qstate {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

// Nearest live ancestor, compressing the path through removed vertices.
int live_parent(int x, std::vector<int>& parent, const std::vector<char>& alive) {
  int p = parent[x];
  while (p != -1 && !alive[p]) p = parent[p];
  int y = x;
  while (parent[y] != p) {
    const int next = parent[y];
    parent[y] = p;
    y = next;
  }
  return p;
}

void check_point(const ContourTree& tree, const TreePoint& p) {
  using Kind = TreePoint::Kind;
  if (p.kind == Kind::kNode) {
    if (p.index < 0 || p.index >= static_cast<int>(tree.nodes().size()))
      throw ArgumentError("tree point refers to a missing node");
    return;
  }
  if (p.index < 0 || p.index >= static_cast<int>(tree.edges().size()))
    throw ArgumentError("tree point refers to a missing edge");
  const auto& e = tree.edges()[p.index];
  const int n = static_cast<int>(e.interior_count());
  if (p.kind == Kind::kEdgeMass && (p.slot < 0 || p.slot >= n))
    throw ArgumentError("tree point mass slot out of range");
  if (p.kind == Kind::kEdgeGap && (p.slot < 0 || p.slot > n))
    throw ArgumentError("tree point gap out of range");
  const double lo = tree.nodes()[e.lo].level;
  const double hi = tree.nodes()[e.hi].level;
  if (p.level < lo || p.level > hi)
    throw ArgumentError("tree point level lies outside its edge");
}

}  // namespace

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kMinimum: return "min";
    case NodeKind::kMaximum: return "max";
    case NodeKind::kSaddle: return "saddle";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ContourTree

ContourTree::ContourTree(std::vector<TreeNode> nodes, std::vector<TreeEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const int nn = static_cast<int>(nodes_.size());
  if (nn == 0) throw ArgumentError("contour tree needs at least one node");
  if (edges_.size() + 1 != nodes_.size())
    throw TopologyError("contour tree has " + std::to_string(edges_.size()) +
                        " edges for " + std::to_string(nn) + " nodes");
  incidence_.assign(nn, {});
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    incidence_[edges_[e].lo].push_back(e);
    incidence_[edges_[e].hi].push_back(e);
  }

  total_ = 0.0;
  for (const auto& n : nodes_) total_ += n.mass;
  for (const auto& e : edges_) total_ += e.interior_mass();

  // Root at node 0; subtree masses give both sides of every edge.
  std::vector<int> order, parent_edge(nn, -1);
  std::vector<char> seen(nn, 0);
  order.reserve(nn);
  order.push_back(0);
  seen[0] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int v = order[i];
    for (int e : incidence_[v]) {
      const int u = other_end(e, v);
      if (seen[u]) continue;
      seen[u] = 1;
      parent_edge[u] = e;
      order.push_back(u);
    }
  }
  if (static_cast<int>(order.size()) != nn)
    throw TopologyError("contour tree is not connected");

  std::vector<double> subtree(nn, 0.0);
  for (int v = 0; v < nn; ++v) subtree[v] = nodes_[v].mass;
  lo_side_.assign(edges_.size(), 0.0);
  hi_side_.assign(edges_.size(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    const int e = parent_edge[v];
    if (e < 0) continue;
    const int p = other_end(e, v);
    const double below = subtree[v];
    const double above = total_ - below - edges_[e].interior_mass();
    if (edges_[e].lo == v) {
      lo_side_[e] = below;
      hi_side_[e] = above;
    } else {
      hi_side_[e] = below;
      lo_side_[e] = above;
    }
    subtree[p] += below + edges_[e].interior_mass();
  }

  folded_into_.assign(nn, -1);
  for (int v = 0; v < nn; ++v) {
    int up = -1, down = -1;
    for (int e : incidence_[v]) {
      if (edges_[e].lo == v && up == -1) up = e;
      if (edges_[e].hi == v && down == -1) down = e;
    }
    folded_into_[v] = up != -1 ? up : down;
  }
}

double ContourTree::side_mass(int edge, int node) const {
  if (edges_[edge].lo == node) return lo_side_[edge];
  if (edges_[edge].hi == node) return hi_side_[edge];
  throw ArgumentError("node is not an endpoint of the edge");
}

std::vector<AreaSample> ContourTree::area_profile(int edge) const {
  const auto& e = edges_[edge];
  const double lo_level = nodes_[e.lo].level;
  const double hi_level = nodes_[e.hi].level;
  const double base = folded_into_[e.lo] == edge ? nodes_[e.lo].mass : 0.0;
  std::vector<AreaSample> out;
  out.reserve(e.interior_count() + 2);
  out.push_back({lo_level, base});
  for (std::size_t i = 0; i < e.interior_count(); ++i)
    out.push_back({e.levels[i], base + e.cumulative[i]});
  const double top = base + e.interior_mass() +
                     (folded_into_[e.hi] == edge ? nodes_[e.hi].mass : 0.0);
  out.push_back({hi_level, top});
  return out;
}

CrossSection ContourTree::cross_section(double c) const {
  const int nn = static_cast<int>(nodes_.size());
  CrossSection out;
  for (int pass = 0; pass < 2; ++pass) {
    const bool sub = pass == 0;
    auto inside = [&](double level) { return sub ? level <= c : level >= c; };
    UnionFind uf(nn);
    for (const auto& e : edges_)
      if (inside(nodes_[e.lo].level) && inside(nodes_[e.hi].level)) uf.unite(e.lo, e.hi);
    std::vector<double> area(nn, 0.0);
    std::vector<char> present(nn, 0);
    for (int v = 0; v < nn; ++v) {
      if (!inside(nodes_[v].level)) continue;
      const int r = uf.find(v);
      present[r] = 1;
      area[r] += nodes_[v].mass;
    }
    for (const auto& e : edges_) {
      const bool lo_in = inside(nodes_[e.lo].level);
      const bool hi_in = inside(nodes_[e.hi].level);
      if (!lo_in && !hi_in) continue;
      const int r = uf.find(lo_in ? e.lo : e.hi);
      double m = 0.0;
      for (std::size_t i = 0; i < e.interior_count(); ++i)
        if (inside(e.levels[i])) m += e.point_mass(i);
      area[r] += m;
    }
    auto& target = sub ? out.sublevel_areas : out.superlevel_areas;
    for (int v = 0; v < nn; ++v)
      if (present[v]) target.push_back(area[v]);
    std::sort(target.begin(), target.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// TreePoint

TreePoint TreePoint::node(const ContourTree& tree, int id) {
  TreePoint p{Kind::kNode, id, 0, 0.0};
  check_point(tree, p);
  p.level = tree.nodes()[id].level;
  return p;
}

TreePoint TreePoint::edge_mass(const ContourTree& tree, int edge, int slot) {
  if (edge < 0 || edge >= static_cast<int>(tree.edges().size()))
    throw ArgumentError("tree point refers to a missing edge");
  const auto& e = tree.edges()[edge];
  if (slot < 0 || slot >= static_cast<int>(e.interior_count()))
    throw ArgumentError("tree point mass slot out of range");
  return {Kind::kEdgeMass, edge, slot, e.levels[slot]};
}

TreePoint TreePoint::edge_gap(int edge, int gap, double level) {
  return {Kind::kEdgeGap, edge, gap, level};
}

TreePoint TreePoint::on_edge(const ContourTree& tree, int edge, double level) {
  if (edge < 0 || edge >= static_cast<int>(tree.edges().size()))
    throw ArgumentError("tree point refers to a missing edge");
  const auto& e = tree.edges()[edge];
  if (level < tree.nodes()[e.lo].level || level > tree.nodes()[e.hi].level)
    throw ArgumentError("level lies outside the edge's interval");
  const auto it = std::lower_bound(e.levels.begin(), e.levels.end(), level);
  const int i = static_cast<int>(it - e.levels.begin());
  if (it != e.levels.end() && *it == level) return {Kind::kEdgeMass, edge, i, level};
  return {Kind::kEdgeGap, edge, i, level};
}

// ---------------------------------------------------------------------------
// Construction

ContourTree build_contour_tree(const ScalarField& f) {
  const SphereMesh& mesh = *f.mesh();
  if (mesh.euler_characteristic() != 2)
    throw TopologyError("contour trees need a genus-0 mesh");
  const int n = static_cast<int>(mesh.vertex_count());
  const auto values = f.values();
  const auto weights = mesh.vertex_weights();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;

  // Join tree: parent is higher. Split tree: parent is lower.
  std::vector<int> join_parent(n, -1), join_children(n, 0);
  std::vector<int> split_parent(n, -1), split_children(n, 0);
  {
    UnionFind uf(n);
    std::vector<int> head(n);
    for (int i = 0; i < n; ++i) {
      const int v = order[i];
      head[v] = v;
      for (int u : mesh.neighbors(v)) {
        if (rank[u] > rank[v]) continue;
        const int ru = uf.find(u);
        const int rv = uf.find(v);
        if (ru == rv) continue;
        join_parent[head[ru]] = v;
        ++join_children[v];
        head[uf.unite(ru, rv)] = v;
      }
    }
  }
  {
    UnionFind uf(n);
    std::vector<int> head(n);
    for (int i = n - 1; i >= 0; --i) {
      const int v = order[i];
      head[v] = v;
      for (int u : mesh.neighbors(v)) {
        if (rank[u] < rank[v]) continue;
        const int ru = uf.find(u);
        const int rv = uf.find(v);
        if (ru == rv) continue;
        split_parent[head[ru]] = v;
        ++split_children[v];
        head[uf.unite(ru, rv)] = v;
      }
    }
  }

  // Merge by repeatedly peeling leaves.
  std::vector<char> alive(n, 1);
  std::vector<int> up_of(n, -1), down_count(n, 0), up_count(n, 0);
  std::vector<std::vector<int>> ups(n);
  auto upper_leaf = [&](int v) { return split_children[v] == 0 && join_children[v] == 1; };
  auto lower_leaf = [&](int v) { return join_children[v] == 0 && split_children[v] == 1; };
  std::deque<int> queue;
  for (int v = 0; v < n; ++v)
    if (upper_leaf(v) || lower_leaf(v)) queue.push_back(v);

  auto add_arc = [&](int lo, int hi) {
    ups[lo].push_back(hi);
    ++up_count[lo];
    ++down_count[hi];
  };

  int remaining = n;
  while (remaining > 1) {
    if (queue.empty()) throw TopologyError("contour tree merge stalled");
    const int v = queue.front();
    queue.pop_front();
    if (!alive[v]) continue;
    int w;
    if (upper_leaf(v)) {
      w = live_parent(v, split_parent, alive);
      if (w < 0) throw TopologyError("upper leaf without a lower neighbour");
      add_arc(w, v);
      --split_children[w];
    } else if (lower_leaf(v)) {
      w = live_parent(v, join_parent, alive);
      if (w < 0) throw TopologyError("lower leaf without an upper neighbour");
      add_arc(v, w);
      --join_children[w];
    } else {
      continue;
    }
    alive[v] = 0;
    --remaining;
    if (upper_leaf(w) || lower_leaf(w)) queue.push_back(w);
  }

  // Collapse regular vertices (one arc up, one arc down) into edges.
  auto regular = [&](int v) { return up_count[v] == 1 && down_count[v] == 1; };
  std::vector<int> node_id(n, -1);
  std::vector<TreeNode> nodes;
  for (int v : order) {
    if (regular(v)) continue;
    node_id[v] = static_cast<int>(nodes.size());
    NodeKind kind = NodeKind::kSaddle;
    if (down_count[v] == 0) kind = NodeKind::kMinimum;
    else if (up_count[v] == 0) kind = NodeKind::kMaximum;
    nodes.push_back({v, values[v], kind, weights[v]});
  }
  std::vector<TreeEdge> edges;
  for (int v : order) {
    if (node_id[v] < 0) continue;
    for (int u : ups[v]) {
      TreeEdge e;
      e.lo = node_id[v];
      while (regular(u)) {
        e.vertices.push_back(u);
        e.levels.push_back(values[u]);
        const double prev = e.cumulative.empty() ? 0.0 : e.cumulative.back();
        e.cumulative.push_back(prev + weights[u]);
        u = ups[u].front();
      }
      e.hi = node_id[u];
      edges.push_back(std::move(e));
    }
  }
  return ContourTree(std::move(nodes), std::move(edges));
}

LevelComponents brute_force_components(const ScalarField& f, double c) {
  const SphereMesh& mesh = *f.mesh();
  const int n = static_cast<int>(mesh.vertex_count());
  const auto values = f.values();
  const auto weights = mesh.vertex_weights();
  LevelComponents out;
  std::vector<int> stack;
  for (int pass = 0; pass < 2; ++pass) {
    const bool sub = pass == 0;
    auto inside = [&](int v) { return sub ? values[v] <= c : values[v] >= c; };
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
      if (seen[s] || !inside(s)) continue;
      LevelComponent comp;
      stack.assign(1, s);
      seen[s] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        comp.vertices.push_back(v);
        comp.area += weights[v];
        for (int u : mesh.neighbors(v)) {
          if (seen[u] || !inside(u)) continue;
          seen[u] = 1;
          stack.push_back(u);
        }
      }
      (sub ? out.sublevel : out.superlevel).push_back(std::move(comp));
    }
  }
  return out;
}

std::vector<double> branch_masses(const ContourTree& tree, const TreePoint& p) {
  check_point(tree, p);
  std::vector<double> out;
  if (p.kind == TreePoint::Kind::kNode) {
    for (int e : tree.incident_edges(p.index)) {
      const int far = tree.other_end(e, p.index);
      out.push_back(tree.edges()[e].interior_mass() + tree.side_mass(e, far));
    }
    return out;
  }
  const auto& e = tree.edges()[p.index];
  const auto slot = static_cast<std::size_t>(p.slot);
  const double below = e.mass_before(slot);
  const double above = e.interior_mass() -
                       (p.kind == TreePoint::Kind::kEdgeMass ? e.cumulative[slot] : below);
  out.push_back(tree.side_mass(p.index, e.lo) + below);
  out.push_back(tree.side_mass(p.index, e.hi) + above);
  return out;
}

double complement_max_area(const ContourTree& tree, const TreePoint& p) {
  const auto masses = branch_masses(tree, p);
  return masses.empty() ? 0.0 : *std::max_element(masses.begin(), masses.end());
}

void write_tree(std::ostream& os, const ContourTree& tree) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << tree.nodes().size() << ' ' << tree.edges().size() << '\n';
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    os << i << ' ' << n.level << ' ' << to_string(n.kind) << '\n';
  }
  for (std::size_t i = 0; i < tree.edges().size(); ++i) {
    const auto& e = tree.edges()[i];
    const auto samples = tree.area_profile(static_cast<int>(i));
    os << e.lo << ' ' << e.hi << ' ' << samples.size();
    for (const auto& s : samples) os << ' ' << s.level << ' ' << s.area;
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace qstate
