#include "qstate/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qstate/errors.hpp"
#include "qstate/parallel.hpp"

namespace qstate {

namespace {

constexpr double kSumTolerance = 1e-9;

// Closed-form tangential gradient of amplitude * cap_bump at p.
Vec3 bump_gradient(const Vec3& p, const SupportCap& cap, double amplitude) {
  const double d = geodesic_distance(p, cap.center);
  if (d >= cap.radius || d == 0.0) return {};
  const double u = d / cap.radius;
  const double s = 1.0 - u * u;
  const double db = -6.0 * u * s * s / cap.radius;
  const Vec3 grad_d = -(1.0 / std::sin(d)) * tangential(cap.center, p);
  return (amplitude * db) * grad_d;
}

// Members that are bitwise copies of each other share a class.
std::vector<int> member_classes(const PartitionOfUnity& p, std::vector<int>& representative) {
  std::vector<int> cls(p.N(), -1);
  representative.clear();
  for (std::size_t i = 0; i < p.N(); ++i) {
    for (int c = 0; c < static_cast<int>(representative.size()) && cls[i] < 0; ++c) {
      const std::size_t r = representative[c];
      const auto a = p.members[i].values();
      const auto b = p.members[r].values();
      if (p.support_caps[i].center == p.support_caps[r].center &&
          p.support_caps[i].radius == p.support_caps[r].radius &&
          std::equal(a.begin(), a.end(), b.begin(), b.end()))
        cls[i] = c;
    }
    if (cls[i] < 0) {
      cls[i] = static_cast<int>(representative.size());
      representative.push_back(static_cast<int>(i));
    }
  }
  return cls;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double SupportCap::area() const { return 0.5 * (1.0 - std::cos(radius)); }

bool SupportCap::disjoint_from(const SupportCap& o) const {
  return geodesic_distance(center, o.center) >= radius + o.radius;
}

double cap_bump(const Vec3& p, const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("cap radius must be positive");
  const double d = geodesic_distance(normalized(p), normalized(center));
  if (d >= radius) return 0.0;
  const double u = d / radius;
  const double s = 1.0 - u * u;
  return s * s * s;
}

void PartitionOfUnity::validate() const {
  if (members.empty()) throw ConstructionError("partition has no members");
  if (support_caps.size() != members.size() || amplitudes.size() != members.size())
    throw ConstructionError("partition needs one cap and one amplitude per member");
  const MeshPtr& mesh = members.front().mesh();
  const auto verts = mesh->vertices();
  std::vector<double> sum(mesh->vertex_count(), 0.0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& cap = support_caps[i];
    if (!members[i].same_mesh(members.front()))
      throw ConstructionError("partition members live on different meshes");
    if (!(cap.area() < 0.5)) {
      std::ostringstream msg;
      msg << "cap " << i << " has area " << cap.area() << ", not below 1/2";
      throw ConstructionError(msg.str());
    }
    for (std::size_t v = 0; v < verts.size(); ++v) {
      const double r = members[i][v];
      if (r < 0.0)
        throw ConstructionError("member " + std::to_string(i) + " is negative at vertex " +
                                std::to_string(v));
      if (r != 0.0 && geodesic_distance(verts[v], cap.center) >= cap.radius)
        throw ConstructionError("member " + std::to_string(i) +
                                " is nonzero outside its cap at vertex " + std::to_string(v));
      sum[v] += r;
    }
  }
  for (std::size_t v = 0; v < sum.size(); ++v)
    if (sum[v] < 1.0 - kSumTolerance) {
      std::ostringstream msg;
      msg << "members sum to " << sum[v] << " < 1 at vertex " << v;
      throw ConstructionError(msg.str());
    }
}

std::vector<Vec3> fibonacci_lattice(int N) {
  if (N < 1) throw ArgumentError("lattice size must be positive");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(N);
  for (int i = 0; i < N; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / N;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return out;
}

PartitionOfUnity build_cap_partition(const MeshPtr& mesh, int N, double overlap) {
  if (!(overlap > 0.0 && overlap < 1.0))
    throw ArgumentError("overlap must be in (0, 1)");
  if (N < 4)
    throw ConstructionError("at least 4 caps of area below 1/2 are needed to cover the sphere, got N = " +
                            std::to_string(N));
  const auto centers = fibonacci_lattice(N);
  const auto verts = mesh->vertices();
  const std::size_t nv = verts.size();

  double covering = 0.0;
  for (const auto& p : verts) {
    double nearest = std::numeric_limits<double>::max();
    for (const auto& c : centers) nearest = std::min(nearest, geodesic_distance(p, c));
    covering = std::max(covering, nearest);
  }
  const double radius = (1.0 + overlap) * covering;
  const SupportCap probe{centers.front(), radius};
  if (!(probe.area() < 0.5)) {
    std::ostringstream msg;
    msg << "caps of radius " << radius << " have area " << probe.area()
        << " >= 1/2; N = " << N << " is too small for overlap " << overlap;
    throw ConstructionError(msg.str());
  }

  std::vector<std::vector<double>> raw(N, std::vector<double>(nv));
  std::vector<double> sum(nv, 0.0);
  for (int i = 0; i < N; ++i)
    for (std::size_t v = 0; v < nv; ++v) {
      raw[i][v] = cap_bump(verts[v], centers[i], radius);
      sum[v] += raw[i][v];
    }
  const double smallest = *std::min_element(sum.begin(), sum.end());
  if (!(smallest > 0.0)) throw ConstructionError("caps do not cover every vertex");
  const double scale = 1.0 / smallest;

  PartitionOfUnity p;
  for (int i = 0; i < N; ++i) {
    for (double& x : raw[i]) x *= scale;
    p.members.emplace_back(mesh, std::move(raw[i]));
    p.support_caps.push_back({centers[i], radius});
    p.amplitudes.push_back(scale);
  }
  p.validate();
  return p;
}

BracketSummary bracket_summary(const PartitionOfUnity& p) {
  BracketSummary out;
  if (p.N() < 2) return out;
  if (p.support_caps.size() != p.N() || p.amplitudes.size() != p.N())
    throw ArgumentError("partition needs one cap and one amplitude per member");

  std::vector<int> rep;
  member_classes(p, rep);
  const MeshPtr& mesh = p.members.front().mesh();
  const auto verts = mesh->vertices();
  const std::size_t k = rep.size();

  // Discrete and closed-form gradients on the vertices where the discrete one
  // is nonzero.
  std::vector<std::vector<int>> support(k);
  std::vector<std::vector<Vec3>> discrete(k), exact(k);
  parallel_for(k, [&](std::size_t c) {
    const int i = rep[c];
    const VectorField g = ambient_gradient(p.members[i]);
    discrete[c].assign(verts.size(), Vec3{});
    exact[c].assign(verts.size(), Vec3{});
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (g[v] == Vec3{}) continue;
      support[c].push_back(static_cast<int>(v));
      discrete[c][v] = g[v];
      exact[c][v] = bump_gradient(verts[v], p.support_caps[i], p.amplitudes[i]);
    }
  });

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      // Caps grown by one mesh edge: discrete gradients leak that far.
      SupportCap ca = p.support_caps[rep[a]], cb = p.support_caps[rep[b]];
      ca.radius += 2.0 * mesh->max_edge_length();
      cb.radius += 2.0 * mesh->max_edge_length();
      if (!ca.disjoint_from(cb)) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }

  std::vector<double> sup(pairs.size()), err(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t q) {
    const auto [a, b] = pairs[q];
    const auto& small = support[a].size() <= support[b].size() ? support[a] : support[b];
    double disc = 0.0, ex = 0.0;
    for (int v : small) {
      disc = std::max(disc, std::abs(kFourPi * triple(verts[v], discrete[a][v], discrete[b][v])));
      ex = std::max(ex, std::abs(kFourPi * triple(verts[v], exact[a][v], exact[b][v])));
    }
    sup[q] = disc;
    err[q] = std::abs(disc - ex);
  });
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    out.max_bracket = std::max(out.max_bracket, sup[q]);
    out.discretization_error = std::max(out.discretization_error, err[q]);
  }
  out.pairs_evaluated = static_cast<int>(pairs.size());
  return out;
}

double max_pairwise_bracket(const PartitionOfUnity& p) { return bracket_summary(p).max_bracket; }

double proof_lower_bound(int N, const QuasiStateConfig& cfg) {
  cfg.validate();
  if (N < 2) throw ArgumentError("the bound needs N >= 2");
  double s = 0.0;
  for (int k = 2; k <= N; ++k) s += std::sqrt(static_cast<double>(k - 1));
  return 1.0 / (2.0 * cfg.defect_C * s * s);
}

PartitionOfUnity duplicate_partition(const PartitionOfUnity& p, int m) {
  if (m < 1) throw ArgumentError("multiplicity must be at least 1");
  if (m == 1) return p;
  PartitionOfUnity out;
  const double inv = 1.0 / m;
  for (std::size_t j = 0; j < p.N(); ++j) {
    const ScalarField scaled = p.members[j] * inv;
    for (int c = 0; c < m; ++c) {
      out.members.push_back(scaled);
      out.support_caps.push_back(p.support_caps[j]);
      out.amplitudes.push_back(p.amplitudes[j] * inv);
    }
  }
  return out;
}

ExperimentResult scaling_experiment(const MeshPtr& mesh, const std::vector<int>& N_list,
                                    const std::vector<int>& m_list,
                                    const QuasiStateConfig& cfg, double overlap) {
  cfg.validate();
  if (N_list.empty() || m_list.empty())
    throw ArgumentError("N and m lists must be nonempty");
  for (int m : m_list)
    if (m < 1) throw ArgumentError("multiplicity must be at least 1");

  ExperimentResult result;
  for (int N : N_list) {
    const PartitionOfUnity base = build_cap_partition(mesh, N, overlap);
    std::vector<double> log_m, log_a;
    for (int m : m_list) {
      const BracketSummary s = bracket_summary(duplicate_partition(base, m));
      ExperimentRow row;
      row.N = N;
      row.m = m;
      row.N_eff = N * m;
      row.measured_max_bracket = s.max_bracket;
      row.proof_bound = proof_lower_bound(row.N_eff, cfg);
      row.slack = 2.0 * s.discretization_error;
      row.satisfied = row.measured_max_bracket >= row.proof_bound - row.slack;
      result.rows.push_back(row);
      log_m.push_back(std::log(static_cast<double>(m)));
      log_a.push_back(std::log(s.max_bracket));
    }
    const bool distinct = std::adjacent_find(log_m.begin(), log_m.end(),
                                             std::not_equal_to<>()) != log_m.end();
    result.slopes.push_back(distinct ? least_squares_slope(log_m, log_a)
                                     : std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

}  // namespace qstate
