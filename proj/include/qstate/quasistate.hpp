#pragma once

// The combinatorial quasi-state on the 2-sphere: zeta(F) is the level of the
// median of F's contour tree, the unique tree point whose complement splits
// into pieces of area at most 1/2.

#include <utility>
#include <vector>

#include "qstate/geometry.hpp"
#include "qstate/reeb.hpp"

namespace qstate {

// Relative tolerance for recognising an exact 1/2 : 1/2 split.
inline constexpr double kBalanceTolerance = 1e-10;
// Pi values at or below this are treated as zero (commuting pair).
inline constexpr double kVacuousPi = 1e-6;
// Default slack for discretisation in the bracket inequality check.
inline constexpr double kInequalitySlack = 0.05;

struct QuasiStateConfig {
  double defect_C = 0.5;

  void validate() const;
};

// Median of the tree. Walks from node 0 towards the heavier side until every
// complementary piece weighs at most half the total. When a piece weighs
// exactly half, the median is the whole segment up to the next mass point in
// that piece; the balancing point in the middle of it is returned.
TreePoint median_point(const ContourTree& tree);

double zeta(const ScalarField& f);

// Independent oracle: finds the largest level c such that some component K of
// {F >= c} has every component of its complement of area <= 1/2, by
// bisection over an n_levels grid followed by bisection inside the bracketing
// cell. Uses flood fills only.
double zeta_bruteforce(const ScalarField& f, int n_levels);

// |zeta(F+G) - zeta(F) - zeta(G)|
double pi_functional(const ScalarField& f, const ScalarField& g);

struct InequalityReport {
  double pi = 0.0;
  double bracket_norm = 0.0;
  double bound = 0.0;
  double defect_C = 0.0;
  bool satisfied = false;
};

// Checks Pi(F,G) <= sqrt(2 C ||{F,G}||) + slack.
InequalityReport bracket_inequality_report(const ScalarField& f, const ScalarField& g,
                                           const QuasiStateConfig& cfg,
                                           double slack = kInequalitySlack);
InequalityReport bracket_inequality_report(double pi, double bracket_norm,
                                           const QuasiStateConfig& cfg,
                                           double slack = kInequalitySlack);

struct RobustnessReport {
  double pi_value = 0.0;
  double defect_C = 0.0;
  double upsilon_lower = 0.0;   // Pi^2 / 2C
  double eps_max_lower = 0.0;   // Pi / 2
  bool vacuous = false;         // Pi == 0: no robustness statement
  // (eps, lower bound on inf ||{F',G'}|| over the eps-neighbourhood)
  std::vector<std::pair<double, double>> upsilon_curve;
};

RobustnessReport robustness_report(const ScalarField& f, const ScalarField& g,
                                   const QuasiStateConfig& cfg,
                                   const std::vector<double>& eps_samples);
// Same report from an already computed Pi.
RobustnessReport robustness_from_pi(double pi, const QuasiStateConfig& cfg,
                                    const std::vector<double>& eps_samples);

}  // namespace qstate
