#include "qstate/quasistate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qstate/errors.hpp"

namespace qstate {

namespace {

// The mass point adjacent to p inside one complementary piece, and the gap
// of the tree separating the two.
struct Neighbor {
  double branch_mass;
  double next_level;
  int edge;
  int gap;
};

std::vector<Neighbor> neighbors_of(const ContourTree& tree, const TreePoint& p) {
  const auto nodes = tree.nodes();
  const auto edges = tree.edges();
  std::vector<Neighbor> out;
  const auto masses = branch_masses(tree, p);
  if (p.kind == TreePoint::Kind::kNode) {
    const auto inc = tree.incident_edges(p.index);
    for (std::size_t k = 0; k < inc.size(); ++k) {
      const int e = inc[k];
      const auto& E = edges[e];
      const int n = static_cast<int>(E.interior_count());
      if (E.lo == p.index) {
        out.push_back({masses[k], n > 0 ? E.levels.front() : nodes[E.hi].level, e, 0});
      } else {
        out.push_back({masses[k], n > 0 ? E.levels.back() : nodes[E.lo].level, e, n});
      }
    }
    return out;
  }
  const auto& E = edges[p.index];
  const int n = static_cast<int>(E.interior_count());
  const int i = p.slot;
  out.push_back({masses[0], i > 0 ? E.levels[i - 1] : nodes[E.lo].level, p.index, i});
  out.push_back({masses[1], i + 1 < n ? E.levels[i + 1] : nodes[E.hi].level, p.index, i + 1});
  return out;
}

TreePoint settle(const ContourTree& tree, const TreePoint& p) {
  const double total = tree.total_area();
  const double half = 0.5 * total;
  for (const auto& nb : neighbors_of(tree, p)) {
    if (std::abs(nb.branch_mass - half) <= kBalanceTolerance * total) {
      return TreePoint::edge_gap(nb.edge, nb.gap, 0.5 * (p.level + nb.next_level));
    }
  }
  return p;
}

// Predicate of the oracle: does some component of {F >= c} leave only
// complementary pieces of area <= 1/2?
bool has_median_component(const SphereMesh& mesh, std::span<const double> values,
                          double c, std::vector<int>& label, std::vector<int>& stack) {
  const int n = static_cast<int>(mesh.vertex_count());
  const auto w = mesh.vertex_weights();
  const double limit = 0.5 + kBalanceTolerance;

  std::fill(label.begin(), label.end(), -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] != -1 || values[s] < c) continue;
    stack.assign(1, s);
    label[s] = ncomp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : mesh.neighbors(v)) {
        if (label[u] != -1 || values[u] < c) continue;
        label[u] = ncomp;
        stack.push_back(u);
      }
    }
    ++ncomp;
  }

  std::vector<char> seen(n);
  for (int k = 0; k < ncomp; ++k) {
    std::fill(seen.begin(), seen.end(), 0);
    bool ok = true;
    for (int s = 0; s < n && ok; ++s) {
      if (seen[s] || label[s] == k) continue;
      double area = 0.0;
      stack.assign(1, s);
      seen[s] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        area += w[v];
        for (int u : mesh.neighbors(v)) {
          if (seen[u] || label[u] == k) continue;
          seen[u] = 1;
          stack.push_back(u);
        }
      }
      ok = area <= limit;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

void QuasiStateConfig::validate() const {
  if (!(defect_C > 0.0) || !std::isfinite(defect_C))
    throw ArgumentError("defect C must be a positive real, got " + std::to_string(defect_C));
}

TreePoint median_point(const ContourTree& tree) {
  const auto edges = tree.edges();
  const double total = tree.total_area();
  const double half = 0.5 * total;

  int v = 0;
  for (std::size_t guard = 0; guard <= tree.nodes().size(); ++guard) {
    int heavy_edge = -1;
    double heavy = -1.0;
    for (int e : tree.incident_edges(v)) {
      const double b = edges[e].interior_mass() + tree.side_mass(e, tree.other_end(e, v));
      if (b > heavy) {
        heavy = b;
        heavy_edge = e;
      }
    }
    if (heavy <= half) return settle(tree, TreePoint::node(tree, v));

    const auto& E = edges[heavy_edge];
    const int n = static_cast<int>(E.interior_count());
    double behind = tree.side_mass(heavy_edge, v);
    const bool upward = E.lo == v;
    for (int k = 0; k < n; ++k) {
      const int i = upward ? k : n - 1 - k;
      const double m = E.point_mass(i);
      if (total - behind - m <= half)
        return settle(tree, TreePoint::edge_mass(tree, heavy_edge, i));
      behind += m;
    }
    v = tree.other_end(heavy_edge, v);
  }
  throw TopologyError("median search did not terminate");
}

double zeta(const ScalarField& f) {
  return median_point(build_contour_tree(f)).level;
}

double zeta_bruteforce(const ScalarField& f, int n_levels) {
  if (n_levels < 2) throw ArgumentError("zeta_bruteforce needs at least 2 levels");
  const SphereMesh& mesh = *f.mesh();
  const auto values = f.values();
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double hi = *mx;
  if (lo == hi) return lo;

  std::vector<int> label(mesh.vertex_count()), stack;
  auto pred = [&](double c) { return has_median_component(mesh, values, c, label, stack); };
  if (pred(hi)) return hi;

  // pred is nonincreasing in c and pred(lo) holds: {F >= min} is everything.
  auto grid = [&](int k) { return lo + (hi - lo) * k / (n_levels - 1); };
  int good = 0, bad = n_levels - 1;
  while (bad - good > 1) {
    const int mid = (good + bad) / 2;
    (pred(grid(mid)) ? good : bad) = mid;
  }
  // {F >= c} only changes at vertex values, so the supremum is the largest
  // vertex value in [grid(good), grid(bad)) that still passes.
  const double a = grid(good), b = grid(bad);
  std::vector<double> cell;
  for (double v : values)
    if (v >= a && v < b) cell.push_back(v);
  std::sort(cell.begin(), cell.end());
  cell.erase(std::unique(cell.begin(), cell.end()), cell.end());
  if (cell.empty()) return a;
  std::size_t pass = 0, fail = cell.size();
  if (!pred(cell[0])) return a;
  while (fail - pass > 1) {
    const std::size_t mid = (pass + fail) / 2;
    (pred(cell[mid]) ? pass : fail) = mid;
  }
  return cell[pass];
}

double pi_functional(const ScalarField& f, const ScalarField& g) {
  if (!f.same_mesh(g)) throw ArgumentError("fields live on different meshes");
  return std::abs(zeta(f + g) - zeta(f) - zeta(g));
}

InequalityReport bracket_inequality_report(double pi, double bracket_norm,
                                           const QuasiStateConfig& cfg, double slack) {
  cfg.validate();
  InequalityReport r;
  r.pi = pi;
  r.bracket_norm = bracket_norm;
  r.defect_C = cfg.defect_C;
  r.bound = std::sqrt(2.0 * cfg.defect_C * bracket_norm);
  r.satisfied = pi <= r.bound + slack;
  return r;
}

InequalityReport bracket_inequality_report(const ScalarField& f, const ScalarField& g,
                                           const QuasiStateConfig& cfg, double slack) {
  return bracket_inequality_report(pi_functional(f, g),
                                   uniform_norm(poisson_bracket(f, g)), cfg, slack);
}

RobustnessReport robustness_from_pi(double pi, const QuasiStateConfig& cfg,
                                    const std::vector<double>& eps_samples) {
  cfg.validate();
  RobustnessReport r;
  r.pi_value = pi;
  r.defect_C = cfg.defect_C;
  r.vacuous = pi <= kVacuousPi;
  if (!r.vacuous) {
    r.upsilon_lower = pi * pi / (2.0 * cfg.defect_C);
    r.eps_max_lower = pi / 2.0;
  }
  std::vector<double> eps = eps_samples;
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    if (!(e > 0.0)) throw ArgumentError("epsilon samples must be positive");
    double v = 0.0;
    if (!r.vacuous && e < pi / 2.0) v = (pi - 2.0 * e) * (pi - 2.0 * e) / (2.0 * cfg.defect_C);
    r.upsilon_curve.emplace_back(e, v);
  }
  return r;
}

RobustnessReport robustness_report(const ScalarField& f, const ScalarField& g,
                                   const QuasiStateConfig& cfg,
                                   const std::vector<double>& eps_samples) {
  return robustness_from_pi(pi_functional(f, g), cfg, eps_samples);
}

}  // namespace qstate
