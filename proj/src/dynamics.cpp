#include "qstate/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "qstate/errors.hpp"
#include "qstate/parallel.hpp"

namespace qstate {

namespace {

constexpr std::size_t kMaxFields = 4;
constexpr int kProjectionIterations = 3;

void require_unit(const Vec3& p, const char* what) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
      std::abs(norm(p) - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << what << " must be a unit vector, got " << p;
    throw ArgumentError(msg.str());
  }
}

void require_same_mesh(const ScalarField& a, const ScalarField& b) {
  if (!a.same_mesh(b)) throw ArgumentError("fields live on different meshes");
}

int vertex_hint(const SphereMesh& mesh, int v) { return mesh.incident_triangles(v)[0]; }

// RK4 for x' = sgrad(sum of fields)(x), q_f' = f~(x), followed by projection
// back to the initial level of the generator.
class FlowIntegrator {
 public:
  FlowIntegrator(const FieldInterpolant& fi, const Vec3& y0, int hint, double osc)
      : fi_(fi), m_(fi.field_count()), x_(y0), hint_(hint), osc_(osc) {
    eval(x_, cur_);
    energy_ = energy(cur_);
    floor_ = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(energy_) + osc_ + 1.0);
    limit_ = 0.1 * fi.mesh()->max_edge_length();
  }

  void step(double dt) {
    Stage k2, k3, k4;
    eval(normalized(x_ + (0.5 * dt) * cur_.velocity), k2);
    eval(normalized(x_ + (0.5 * dt) * k2.velocity), k3);
    eval(normalized(x_ + dt * k3.velocity), k4);
    x_ = normalized(x_ + (dt / 6.0) * (cur_.velocity + 2.0 * k2.velocity +
                                       2.0 * k3.velocity + k4.velocity));
    for (std::size_t f = 0; f < m_; ++f)
      q_[f] += (dt / 6.0) *
               (cur_.values[f] + 2.0 * k2.values[f] + 2.0 * k3.values[f] + k4.values[f]);
    t_ += dt;

    eval(x_, cur_);
    for (int it = 0; it < kProjectionIterations; ++it) {
      const double e = energy(cur_) - energy_;
      const double g2 = dot(cur_.gradient, cur_.gradient);
      if (std::abs(e) <= floor_ || g2 == 0.0 || std::abs(e) > limit_ * std::sqrt(g2)) break;
      x_ = normalized(x_ - (e / g2) * cur_.gradient);
      eval(x_, cur_);
    }
    const double drift = std::abs(energy(cur_) - energy_);
    max_drift_ = std::max(max_drift_, drift);
    if (drift > std::max(drift_budget(osc_, t_), floor_)) {
      std::ostringstream msg;
      msg << "generator drift " << drift << " at t = " << t_
          << " exceeds the budget; use a smaller step than " << dt;
      throw IntegratorError(msg.str());
    }
  }

  const Vec3& point() const { return x_; }
  int hint() const { return hint_; }
  double time() const { return t_; }
  double integral(std::size_t f) const { return q_[f]; }
  double initial_energy() const { return energy_; }
  double max_drift() const { return max_drift_; }

 private:
  struct Stage {
    Vec3 velocity;
    Vec3 gradient;
    std::array<double, kMaxFields> values{};
  };

  void eval(const Vec3& p, Stage& s) {
    std::array<FieldInterpolant::Sample, kMaxFields> samples;
    fi_.sample(p, hint_, std::span(samples.data(), m_));
    s.gradient = Vec3{};
    for (std::size_t f = 0; f < m_; ++f) {
      s.gradient += samples[f].gradient;
      s.values[f] = samples[f].value;
    }
    s.velocity = kFourPi * cross(s.gradient, p);
  }

  double energy(const Stage& s) const {
    double e = 0.0;
    for (std::size_t f = 0; f < m_; ++f) e += s.values[f];
    return e;
  }

  const FieldInterpolant& fi_;
  std::size_t m_;
  Vec3 x_;
  int hint_;
  double osc_;
  Stage cur_;
  std::array<double, kMaxFields> q_{};
  double t_ = 0.0;
  double energy_ = 0.0;
  double floor_ = 0.0;
  double limit_ = 0.0;
  double max_drift_ = 0.0;
};

double generator_oscillation(const std::vector<ScalarField>& fields) {
  ScalarField sum = fields.front();
  for (std::size_t f = 1; f < fields.size(); ++f) sum = sum + fields[f];
  return oscillation(sum);
}

// Number of steps covering `duration` at the angular step limit.
long step_count(double duration, double speed, const StepControl& control) {
  if (duration <= 0.0 || speed <= 0.0) return duration > 0.0 ? 1 : 0;
  const double n = std::ceil(duration * speed / control.max_step_angle);
  if (n > 1e9) throw IntegratorError("integration would need more than 1e9 steps");
  return std::max(1L, static_cast<long>(n));
}

struct Sampling {
  MeshPtr mesh;
  std::size_t count;
};

Sampling sampling_for(const MeshPtr& mesh, int sample_level) {
  if (sample_level < 0 || sample_level == mesh->subdivision_level())
    return {mesh, mesh->vertex_count()};
  if (sample_level > mesh->subdivision_level())
    throw ArgumentError("sample level " + std::to_string(sample_level) +
                        " exceeds the mesh level " +
                        std::to_string(mesh->subdivision_level()));
  MeshPtr coarse = build_icosphere(sample_level);
  const auto fine = mesh->vertices();
  const auto cv = coarse->vertices();
  if (cv.size() > fine.size()) throw ArgumentError("sampling mesh is larger than the mesh");
  for (std::size_t i = 0; i < cv.size(); ++i)
    if (norm(cv[i] - fine[i]) > 1e-12)
      throw ArgumentError("coarse sampling requires an icosphere mesh");
  return {coarse, cv.size()};
}

struct RawMeasurement {
  std::vector<double> f1_out, f2_out;
  Sampling sampling;
  double delta = 0.0, delta_2 = 0.0;
  double conservation = 0.0, pointwise = 0.0;
};

RawMeasurement measure(const ScalarField& f1, const ScalarField& f2, double T,
                       double epsilon, const MeasurementOptions& options) {
  require_same_mesh(f1, f2);
  if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("T must be positive");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw ArgumentError("epsilon must be nonnegative");
  options.validate();

  const SphereMesh& mesh = *f1.mesh();
  RawMeasurement out{{}, {}, sampling_for(f1.mesh(), options.sample_level)};
  const std::size_t n = out.sampling.count;
  out.f1_out.assign(f1.values().begin(), f1.values().begin() + n);
  out.f2_out.assign(f2.values().begin(), f2.values().begin() + n);
  if (epsilon == 0.0) return out;

  const std::vector<ScalarField> fields{f1, f2};
  const FieldInterpolant fi(fields);
  const double osc = generator_oscillation(fields);
  const double duration = epsilon * T;
  const long steps = step_count(duration, fi.max_vertex_speed(), options.step);
  const double dt = duration / static_cast<double>(steps);

  std::vector<double> drift(n);
  parallel_for(n, [&](std::size_t i) {
    const int v = static_cast<int>(i);
    FlowIntegrator flow(fi, mesh.vertices()[v], vertex_hint(mesh, v), osc);
    for (long s = 0; s < steps; ++s) flow.step(dt);
    out.f1_out[i] = flow.integral(0) / duration;
    out.f2_out[i] = flow.integral(1) / duration;
    drift[i] = flow.max_drift();
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.delta = std::max(out.delta, std::abs(out.f1_out[i] - f1[i]));
    out.delta_2 = std::max(out.delta_2, std::abs(out.f2_out[i] - f2[i]));
    out.pointwise = std::max(
        out.pointwise, std::abs(out.f1_out[i] + out.f2_out[i] - f1[i] - f2[i]));
    out.conservation = std::max(out.conservation, drift[i]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Interpolation

FieldInterpolant::FieldInterpolant(const std::vector<ScalarField>& fields) {
  if (fields.empty()) throw ArgumentError("interpolant needs at least one field");
  if (fields.size() > kMaxFields)
    throw ArgumentError("interpolant supports at most " + std::to_string(kMaxFields) +
                        " fields");
  mesh_ = fields.front().mesh();
  count_ = fields.size();
  const std::size_t nv = mesh_->vertex_count();
  values_.reserve(count_ * nv);
  gradients_.reserve(count_ * nv);
  std::vector<Vec3> total(nv);
  for (const auto& f : fields) {
    require_same_mesh(f, fields.front());
    values_.insert(values_.end(), f.values().begin(), f.values().end());
    const VectorField g = ambient_gradient(f);
    gradients_.insert(gradients_.end(), g.vectors().begin(), g.vectors().end());
    for (std::size_t v = 0; v < nv; ++v) total[v] += g[v];
  }
  for (const auto& g : total) max_speed_ = std::max(max_speed_, kFourPi * norm(g));
}

void FieldInterpolant::sample(const Vec3& p, int& hint, std::span<Sample> out) const {
  const Location loc = mesh_->locate(p, hint);
  hint = loc.triangle;
  const auto& tri = mesh_->triangles()[loc.triangle];
  const auto V = mesh_->vertices();
  const Vec3& a = V[tri[0]];
  const Vec3& b = V[tri[1]];
  const Vec3& c = V[tri[2]];
  // l_k = <p, n_k> / <p, N> with n_k the cross product of the other two.
  const Vec3 n[3] = {cross(b, c), cross(c, a), cross(a, b)};
  const Vec3 sum_n = n[0] + n[1] + n[2];
  const double w[3] = {dot(p, n[0]), dot(p, n[1]), dot(p, n[2])};
  const double s = w[0] + w[1] + w[2];
  double lambda[3];
  Vec3 dlambda[3];
  for (int k = 0; k < 3; ++k) {
    lambda[k] = w[k] / s;
    dlambda[k] = (s * n[k] - w[k] * sum_n) / (s * s);
  }
  const std::size_t nv = mesh_->vertex_count();
  for (std::size_t f = 0; f < out.size() && f < count_; ++f) {
    double value = 0.0;
    Vec3 grad;
    for (int k = 0; k < 3; ++k) {
      const std::size_t idx = f * nv + static_cast<std::size_t>(tri[k]);
      const Vec3& g = gradients_[idx];
      const double h = values_[idx] + 0.5 * dot(g, p - V[tri[k]]);
      value += lambda[k] * h;
      grad += h * dlambda[k] + (0.5 * lambda[k]) * g;
    }
    out[f] = {value, tangential(grad, p)};
  }
}

double FieldInterpolant::value(std::size_t field, const Vec3& p, int& hint) const {
  if (field >= count_) throw ArgumentError("field index out of range");
  std::array<Sample, kMaxFields> s;
  sample(p, hint, std::span(s.data(), count_));
  return s[field].value;
}

Vec3 interpolate(const VectorField& field, const Vec3& p, int& hint) {
  const SphereMesh& mesh = *field.mesh();
  const Location loc = mesh.locate(p, hint);
  hint = loc.triangle;
  const auto& tri = mesh.triangles()[loc.triangle];
  Vec3 v;
  for (int k = 0; k < 3; ++k) v += loc.bary[k] * field[tri[k]];
  return tangential(v, p);
}

// ---------------------------------------------------------------------------
// Single trajectories

void FlowSpec::validate() const {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw ArgumentError("flow duration must be a nonnegative real");
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw ArgumentError("step size must be positive");
  if (duration > 0.0 && step_size > duration)
    throw ArgumentError("step size must not exceed the duration");
}

double drift_budget(double oscillation, double t) { return 1e-6 * oscillation * (1.0 + t); }

Trajectory integrate_flow(const FlowSpec& spec, const Vec3& y0) {
  spec.validate();
  require_unit(y0, "initial point");
  const Vec3 start = normalized(y0);
  const std::vector<ScalarField> fields{spec.generator};
  const FieldInterpolant fi(fields);
  FlowIntegrator flow(fi, start, 0, oscillation(spec.generator));

  Trajectory tr;
  tr.times.push_back(0.0);
  tr.points.push_back(start);
  if (spec.duration == 0.0) return tr;
  const double raw = std::ceil(spec.duration / spec.step_size);
  if (raw > 1e9) throw ArgumentError("flow would need more than 1e9 steps");
  const long steps = static_cast<long>(raw);
  const double dt = spec.duration / static_cast<double>(steps);
  tr.times.reserve(steps + 1);
  tr.points.reserve(steps + 1);
  for (long s = 1; s <= steps; ++s) {
    flow.step(dt);
    tr.times.push_back(s == steps ? spec.duration : s * dt);
    tr.points.push_back(flow.point());
  }
  tr.max_drift = flow.max_drift();
  return tr;
}

// ---------------------------------------------------------------------------
// Flow composition

void StepControl::validate() const {
  if (!(max_step_angle > 0.0) || !(max_step_angle <= 0.5))
    throw ArgumentError("max step angle must be in (0, 0.5]");
}

CompositionReport flow_composition_residual(const ScalarField& f, const ScalarField& g,
                                            double t, const StepControl& control) {
  return flow_composition_sweep(f, g, {t}, control).front();
}

std::vector<CompositionReport> flow_composition_sweep(const ScalarField& f,
                                                      const ScalarField& g,
                                                      std::vector<double> times,
                                                      const StepControl& control) {
  require_same_mesh(f, g);
  control.validate();
  if (times.empty()) throw ArgumentError("no times given");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("times must be nonnegative");
  std::sort(times.begin(), times.end());

  const SphereMesh& mesh = *f.mesh();
  const std::vector<ScalarField> flow_fields{f};
  const FieldInterpolant fi(flow_fields);
  const FieldInterpolant gi(std::vector<ScalarField>{g});
  const double osc = oscillation(f);
  const double bracket = uniform_norm(poisson_bracket(f, g));

  // Steps per interval between consecutive times.
  std::vector<long> steps(times.size());
  std::vector<double> dts(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double span = times[k] - (k == 0 ? 0.0 : times[k - 1]);
    steps[k] = step_count(span, fi.max_vertex_speed(), control);
    dts[k] = steps[k] > 0 ? span / static_cast<double>(steps[k]) : 0.0;
  }

  const std::size_t nv = mesh.vertex_count();
  const std::size_t nt = times.size();
  std::vector<double> residual(nv * nt), drift(nv);
  parallel_for(nv, [&](std::size_t i) {
    const int v = static_cast<int>(i);
    FlowIntegrator flow(fi, mesh.vertices()[v], vertex_hint(mesh, v), osc);
    for (std::size_t k = 0; k < nt; ++k) {
      for (long s = 0; s < steps[k]; ++s) flow.step(dts[k]);
      if (flow.time() == 0.0) continue;  // exactly the identity map
      int hint = flow.hint();
      residual[i * nt + k] = std::abs(gi.value(0, flow.point(), hint) - g[i]);
    }
    drift[i] = flow.max_drift();
  });

  const double conservation = *std::max_element(drift.begin(), drift.end());
  std::vector<CompositionReport> out(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    auto& r = out[k];
    r.t = times[k];
    for (std::size_t i = 0; i < nv; ++i) r.residual = std::max(r.residual, residual[i * nt + k]);
    r.bound = times[k] * bracket;
    r.conservation_residual = conservation;
    r.satisfied = r.residual <= r.bound + 3.0 * conservation;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Measurement

void MeasurementOptions::validate() const {
  step.validate();
  if (sample_level > kMaxSubdivisionLevel)
    throw ArgumentError("sample level must be at most " +
                        std::to_string(kMaxSubdivisionLevel));
}

MeasurementReport simulate_measurement(const ScalarField& f1, const ScalarField& f2,
                                       double T, double epsilon,
                                       const MeasurementOptions& options,
                                       const QuasiStateConfig& cfg) {
  cfg.validate();
  RawMeasurement raw = measure(f1, f2, T, epsilon, options);
  MeasurementReport r{
      .T = T,
      .epsilon = epsilon,
      .F1_out = ScalarField(raw.sampling.mesh, std::move(raw.f1_out)),
      .F2_out = ScalarField(raw.sampling.mesh, std::move(raw.f2_out)),
      .delta = raw.delta,
      .delta_2 = raw.delta_2,
      .bound = std::nullopt,
      .conservation_residual = raw.conservation,
      .pointwise_residual = raw.pointwise,
      .satisfied = true,
  };
  if (epsilon > 0.0) {
    r.bound = measurement_bound(f1, f2, T, epsilon, cfg);
    r.satisfied = r.delta >= *r.bound - 3.0 * r.conservation_residual;
  }
  return r;
}

double measurement_bound(double pi, double min_centred_norm, double T, double epsilon,
                         const QuasiStateConfig& cfg) {
  cfg.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("T must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ArgumentError("the measurement bound needs epsilon > 0");
  return 0.5 * pi - std::sqrt(cfg.defect_C / (T * epsilon)) * std::sqrt(min_centred_norm);
}

double measurement_bound(const ScalarField& f1, const ScalarField& f2, double T,
                         double epsilon, const QuasiStateConfig& cfg) {
  require_same_mesh(f1, f2);
  // Validate before the expensive part.
  measurement_bound(0.0, 0.0, T, epsilon, cfg);
  const double n1 = uniform_norm(f1 + (-mean_value(f1)));
  const double n2 = uniform_norm(f2 + (-mean_value(f2)));
  return measurement_bound(pi_functional(f1, f2), std::min(n1, n2), T, epsilon, cfg);
}

ScalingReport scaling_checks(const ScalarField& f1, const ScalarField& f2, double T,
                             double epsilon, double E, const MeasurementOptions& options) {
  if (!(T > 0.0) || !(epsilon > 0.0) || !(E > 0.0) || !std::isfinite(T * epsilon * E))
    throw ArgumentError("scaling checks need positive T, epsilon and E");
  ScalingReport r;
  r.time_lhs = measure(f1, f2, T, epsilon, options).delta;
  r.time_rhs = measure(f1, f2, epsilon * T, 1.0, options).delta;
  r.time_residual = std::abs(r.time_lhs - r.time_rhs);
  r.energy_lhs = measure(E * f1, E * f2, T, epsilon, options).delta;
  r.energy_rhs = E * measure(f1, f2, E * T, epsilon, options).delta;
  r.energy_residual = std::abs(r.energy_lhs - r.energy_rhs);
  return r;
}

}  // namespace qstate
