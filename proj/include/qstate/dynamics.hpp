#pragma once

// Hamiltonian flows on the sphere mesh, the flow-composition estimate
// ||G o f_t - G|| <= t ||{F, G}||, and the pointer-model measurement
// simulator.
//
// Flows are integrated with classical RK4 on the ambient state, renormalized
// to the sphere after every step. The velocity is the exact Hamiltonian field
// of a continuous reconstruction G~ of the vertex data (FieldInterpolant), so
// G~ is a first integral of the continuous problem. After each step the point
// is moved back onto its level set of G~ by Newton steps along the gradient.

#include <optional>
#include <span>
#include <vector>

#include "qstate/geometry.hpp"
#include "qstate/quasistate.hpp"

namespace qstate {

// Continuous reconstruction of one or more vertex fields sharing a mesh.
// Inside a triangle with central-projection barycentrics l_k,
//   f~(p) = sum_k l_k(p) * (f_k + <g_k, p - v_k> / 2)
// where g_k is the vertex gradient. f~ matches the vertex values, is
// continuous across edges and has an exact ambient gradient everywhere.
class FieldInterpolant {
 public:
  struct Sample {
    double value = 0.0;
    Vec3 gradient;  // tangential
  };

  explicit FieldInterpolant(const std::vector<ScalarField>& fields);

  const MeshPtr& mesh() const { return mesh_; }
  std::size_t field_count() const { return count_; }

  // One sample per field. `hint` is a starting triangle for point location
  // and is updated to the triangle containing p.
  void sample(const Vec3& p, int& hint, std::span<Sample> out) const;
  double value(std::size_t field, const Vec3& p, int& hint) const;

  // Largest |sgrad| over the vertices of the sum of all fields.
  double max_vertex_speed() const { return max_speed_; }

 private:
  MeshPtr mesh_;
  std::size_t count_ = 0;
  std::vector<double> values_;  // field-major
  std::vector<Vec3> gradients_;
  double max_speed_ = 0.0;
};

// Barycentric interpolation of a vertex vector field, re-projected to the
// tangent plane at p.
Vec3 interpolate(const VectorField& field, const Vec3& p, int& hint);

struct FlowSpec {
  ScalarField generator;
  double duration = 0.0;
  double step_size = 0.0;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> points;
  // max |G~(x(t)) - G~(y0)| over the recorded points.
  double max_drift = 0.0;
};

// Allowed generator drift at time t: 1e-6 * osc(G) * (1 + t).
double drift_budget(double oscillation, double t);

// Steps of duration/n with n = ceil(duration / step_size). Throws
// IntegratorError if the drift budget is exceeded, GeometryError if a point
// cannot be located.
Trajectory integrate_flow(const FlowSpec& spec, const Vec3& y0);

// Step selection for the batch integrators below: the time step is
// max_step_angle / (largest vertex speed of the generator), shrunk so that
// it divides the integration time.
struct StepControl {
  double max_step_angle = 0.05;

  void validate() const;
};

struct CompositionReport {
  double t = 0.0;
  double residual = 0.0;  // max_v |G~(f_t(v)) - G(v)|
  double bound = 0.0;     // t ||{F, G}||
  double conservation_residual = 0.0;  // worst drift of F along its flow
  bool satisfied = false;  // residual <= bound + 3 * conservation_residual
};

CompositionReport flow_composition_residual(const ScalarField& f, const ScalarField& g,
                                            double t, const StepControl& control = {});
// Same check at several times; every vertex is integrated once up to the
// largest time. Times must be nonnegative.
std::vector<CompositionReport> flow_composition_sweep(const ScalarField& f,
                                                      const ScalarField& g,
                                                      std::vector<double> times,
                                                      const StepControl& control = {});

struct MeasurementOptions {
  StepControl step;
  // Initial points are the vertices of the icosphere of this level, which are
  // the leading vertices of a finer icosphere. Negative: all mesh vertices.
  int sample_level = -1;

  void validate() const;
};

struct MeasurementReport {
  double T = 0.0;
  double epsilon = 0.0;
  // Measured F'_i on the sampling mesh.
  ScalarField F1_out;
  ScalarField F2_out;
  double delta = 0.0;    // max |F'_1 - F_1| over the initial points
  double delta_2 = 0.0;  // max |F'_2 - F_2|, equal to delta up to integration error
  // Theorem lower bound on delta; absent when epsilon = 0.
  std::optional<double> bound;
  double conservation_residual = 0.0;  // worst generator drift on any path
  double pointwise_residual = 0.0;     // max |F'_1 + F'_2 - F_1 - F_2|
  bool satisfied = false;              // delta >= bound - 3 * conservation_residual
};

// F'_i(y) = (1/T) int_0^T F_i(g_{eps t} y) dt, where g is the flow of
// F1 + F2, integrated for time eps*T with the time averages as extra RK4
// components. For eps = 0, F'_i = F_i and delta = 0 exactly.
MeasurementReport simulate_measurement(const ScalarField& f1, const ScalarField& f2,
                                       double T, double epsilon,
                                       const MeasurementOptions& options = {},
                                       const QuasiStateConfig& cfg = {});

// 1/2 Pi(F1, F2) - sqrt(C / (T eps)) * sqrt(min ||F_i - <F_i>||).
double measurement_bound(const ScalarField& f1, const ScalarField& f2, double T,
                         double epsilon, const QuasiStateConfig& cfg = {});
// Same expression from precomputed Pi and centred norms.
double measurement_bound(double pi, double min_centred_norm, double T, double epsilon,
                         const QuasiStateConfig& cfg = {});

struct ScalingReport {
  // Delta(T, eps, F) against Delta(eps T, 1, F).
  double time_lhs = 0.0, time_rhs = 0.0, time_residual = 0.0;
  // Delta(T, eps, E F) against E Delta(E T, eps, F).
  double energy_lhs = 0.0, energy_rhs = 0.0, energy_residual = 0.0;
};

ScalingReport scaling_checks(const ScalarField& f1, const ScalarField& f2, double T,
                             double epsilon, double E,
                             const MeasurementOptions& options = {});

}  // namespace qstate
