#pragma once

// Partitions of unity subordinate to covers of the sphere by small caps, and
// the lower bound on their largest pairwise Poisson bracket.

#include <string>
#include <vector>

#include "qstate/geometry.hpp"
#include "qstate/quasistate.hpp"

namespace qstate {

struct SupportCap {
  Vec3 center;
  double radius = 0.0;  // geodesic

  // Normalized area (1 - cos r) / 2.
  double area() const;
  bool disjoint_from(const SupportCap& o) const;
};

// (1 - (d/r)^2)^3 for geodesic distance d < r, exactly 0 beyond. C^2 at the
// rim. `center` need not be normalized.
double cap_bump(const Vec3& p, const Vec3& center, double radius);

// Member i is amplitudes[i] * cap_bump(., caps[i].center, caps[i].radius).
struct PartitionOfUnity {
  std::vector<ScalarField> members;
  std::vector<SupportCap> support_caps;
  std::vector<double> amplitudes;

  std::size_t N() const { return members.size(); }
  // Checks every invariant: nonnegative members vanishing outside their caps,
  // caps of area < 1/2, and sum >= 1 - 1e-9 at every vertex. Throws
  // ConstructionError naming the first violation.
  void validate() const;
};

// N caps centred on a Fibonacci lattice, radius (1 + overlap) times the
// lattice covering radius measured on the mesh; the bumps share one scale
// factor chosen so that their sum is at least 1 everywhere.
PartitionOfUnity build_cap_partition(const MeshPtr& mesh, int N, double overlap);

// N points z_i = 1 - (2i + 1)/N, longitude i times the golden angle.
std::vector<Vec3> fibonacci_lattice(int N);

struct BracketSummary {
  double max_bracket = 0.0;  // max_{i<j} ||{rho_i, rho_j}||
  // max over pairs of | discrete sup - closed-form sup over the vertices |
  double discretization_error = 0.0;
  int pairs_evaluated = 0;
};

double max_pairwise_bracket(const PartitionOfUnity& p);
BracketSummary bracket_summary(const PartitionOfUnity& p);

// 1 / (2 C (sum_{k=2}^N sqrt(k - 1))^2)
double proof_lower_bound(int N, const QuasiStateConfig& cfg);

// N*m members: each rho_j / m repeated m times.
PartitionOfUnity duplicate_partition(const PartitionOfUnity& p, int m);

struct ExperimentRow {
  int N = 0;
  int m = 0;
  int N_eff = 0;
  double measured_max_bracket = 0.0;
  double proof_bound = 0.0;
  double slack = 0.0;  // 2 x estimated discretization error
  bool satisfied = false;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  // Least-squares slope of log(measured) against log(m), per base N, in the
  // order of N_list. NaN when fewer than two multiplicities are given.
  std::vector<double> slopes;
};

ExperimentResult scaling_experiment(const MeshPtr& mesh, const std::vector<int>& N_list,
                                    const std::vector<int>& m_list,
                                    const QuasiStateConfig& cfg, double overlap = 0.3);

}  // namespace qstate
