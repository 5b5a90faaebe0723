#include "qstate/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "qstate/dynamics.hpp"
#include "qstate/errors.hpp"
#include "qstate/partitions.hpp"
#include "qstate/quasistate.hpp"
#include "qstate/report_io.hpp"

namespace qstate {

namespace {

// Closed form of ||{x^2, y^2}|| for the normalized area form.
const double kBracketExact = 16.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
constexpr double kBracketQuoted = 9.6745;

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& o) : opt_(o) {}

  MeshPtr mesh(int level) {
    auto& m = meshes_[level];
    if (!m) m = build_icosphere(level);
    return m;
  }

  ScalarField coord_square(int level, int axis) {
    return sample_field(mesh(level), [axis](const Vec3& p) {
      const double c = axis == 0 ? p.x : axis == 1 ? p.y : p.z;
      return c * c;
    });
  }

  std::mt19937_64 rng(int id) const { return std::mt19937_64(opt_.seed + 1000003ULL * id); }

  const VerifyOptions& opt() const { return opt_; }

 private:
  VerifyOptions opt_;
  std::map<int, MeshPtr> meshes_;
};

// Coefficients of all monomials x^a y^b z^c with a + b + c <= 3.
ScalarField random_cubic(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<int, 4>> terms;  // a, b, c, index
  std::vector<double> coef;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b)
      for (int c = 0; a + b + c <= 3; ++c) {
        terms.push_back({a, b, c, 0});
        coef.push_back(u(rng));
      }
  return sample_field(mesh, [&](const Vec3& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k)
      s += coef[k] * std::pow(p.x, terms[k][0]) * std::pow(p.y, terms[k][1]) *
           std::pow(p.z, terms[k][2]);
    return s;
  });
}

// Sum of four plane waves with random frequencies up to 3.
ScalarField random_smooth(const MeshPtr& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Wave {
    Vec3 k;
    double phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 4; ++i)
    waves.push_back({3.0 * Vec3{u(rng), u(rng), u(rng)}, std::numbers::pi * u(rng), u(rng)});
  return sample_field(mesh, [&](const Vec3& p) {
    double s = 0.0;
    for (const auto& w : waves) s += w.amp * std::sin(dot(w.k, p) + w.phase);
    return s;
  });
}

struct Values {
  double zx, zy, zz, zxy, pi, bracket;
};

Values quasi_state_values(Suite& s, int level) {
  const ScalarField x2 = s.coord_square(level, 0);
  const ScalarField y2 = s.coord_square(level, 1);
  const ScalarField z2 = s.coord_square(level, 2);
  Values v;
  v.zx = zeta(x2);
  v.zy = zeta(y2);
  v.zz = zeta(z2);
  v.zxy = zeta(x2 + y2);
  v.pi = std::abs(v.zxy - v.zx - v.zy);
  v.bracket = uniform_norm(poisson_bracket(x2, y2));
  return v;
}

// ---------------------------------------------------------------------------

CheckResult check_values(Suite& s) {
  const Values v = quasi_state_values(s, s.opt().level);
  CheckResult r;
  r.passed = std::abs(v.zx) <= 0.02 && std::abs(v.zy) <= 0.02 && std::abs(v.zz) <= 0.02 &&
             std::abs(v.zxy - 1.0) <= 0.02 && std::abs(v.pi - 1.0) <= 0.05;
  r.detail = fmt("zeta: x^2 %.3g, y^2 %.3g, z^2 %.3g, x^2+y^2 %.6f; Pi %.6f", v.zx, v.zy,
                 v.zz, v.zxy, v.pi);
  return r;
}

CheckResult check_bracket(Suite& s) {
  const Values v = quasi_state_values(s, s.opt().level);
  CheckResult r;
  const double rel = std::abs(v.bracket - kBracketQuoted) / kBracketQuoted;
  r.passed = rel <= 0.02;
  r.detail = fmt("%.6f vs 9.6745 (rel %.2e); closed form %.6f", v.bracket, rel, kBracketExact);
  return r;
}

CheckResult check_inequality(Suite& s) {
  auto rng = s.rng(3);
  const MeshPtr mesh = s.mesh(s.opt().level);
  const QuasiStateConfig cfg{0.5};
  int violations = 0;
  double worst_margin = -1e300, empirical_C = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ScalarField f = random_cubic(mesh, rng);
    const ScalarField g = random_cubic(mesh, rng);
    const InequalityReport rep = bracket_inequality_report(f, g, cfg, kInequalitySlack);
    if (!rep.satisfied) ++violations;
    worst_margin = std::max(worst_margin, rep.pi - rep.bound);
    // Smallest C that would still fit this pair; recorded as data only.
    if (rep.bracket_norm > 0.0)
      empirical_C = std::max(empirical_C, rep.pi * rep.pi / (2.0 * rep.bracket_norm));
  }
  CheckResult r;
  r.passed = violations == 0;
  r.detail = fmt("200 pairs, C = 1/2, violations %d, max Pi - bound %.4f, max Pi^2/2||{F,G}|| %.3g",
                 violations, worst_margin, empirical_C);
  return r;
}

CheckResult check_robustness(Suite& s) {
  const int level = s.opt().level;
  const double pi = pi_functional(s.coord_square(level, 0), s.coord_square(level, 1));
  std::vector<double> eps;
  for (int k = 1; k <= 9; ++k) eps.push_back(k / 20.0);
  const RobustnessReport rep = robustness_from_pi(pi, QuasiStateConfig{2.0}, eps);
  double arith = 0.0, model = 0.0;
  for (const auto& [e, u] : rep.upsilon_curve) {
    const double exact = (pi - 2.0 * e) * (pi - 2.0 * e) / 4.0;
    const double ideal = (1.0 - 2.0 * e) * (1.0 - 2.0 * e) / 4.0;
    arith = std::max(arith, std::abs(u - exact) / exact);
    model = std::max(model, std::abs(u - ideal) / ideal);
  }
  CheckResult r;
  r.passed = std::abs(pi - 1.0) <= 0.05 && arith <= 1e-8 && model <= 0.10 &&
             rep.upsilon_curve.size() == 9;
  r.detail = fmt("Pi %.6f; rel. error vs (Pi - 2 eps)^2/4 %.1e, vs (1 - 2 eps)^2/4 %.2e", pi,
                 arith, model);
  return r;
}

CheckResult check_oracle(Suite& s) {
  auto rng = s.rng(5);
  const MeshPtr mesh = s.mesh(s.opt().oracle_level);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ScalarField f = random_smooth(mesh, rng);
    worst = std::max(worst, std::abs(zeta(f) - zeta_bruteforce(f, 512)));
  }
  CheckResult r;
  r.passed = worst <= 1e-3;
  r.detail = fmt("50 fields at level %d, max |difference| %.2e", s.opt().oracle_level, worst);
  return r;
}

CheckResult check_axioms(Suite& s) {
  auto rng = s.rng(6);
  const MeshPtr mesh = s.mesh(s.opt().level);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double lin = 0.0, mono = 0.0, lip = 0.0, van = 0.0, comp = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ScalarField f = random_smooth(mesh, rng);
    const double zf = zeta(f);
    // Quasi-linearity on the algebra generated by F.
    const double a = 3.0 * u(rng), b = 2.0 * u(rng);
    lin = std::max(lin, std::abs(zeta(a * f + b) - (a * zf + b)));
    // Monotonicity: G = F + (nonnegative field).
    const ScalarField h = random_smooth(mesh, rng);
    const ScalarField g = f + (h + (-*std::min_element(h.values().begin(), h.values().end())));
    const double zg = zeta(g);
    mono = std::max(mono, zf - zg);
    // Lipschitz continuity in the sup norm.
    const ScalarField g2 = f + 0.3 * random_smooth(mesh, rng);
    lip = std::max(lip, std::abs(zf - zeta(g2)) - uniform_norm(f - g2));
    // Vanishing on a cap of area at most 0.45.
    const Vec3 c = normalized(Vec3{u(rng), u(rng), u(rng)} + Vec3{1e-9, 0, 0});
    const double area = 0.45 * (0.05 + 0.95 * std::abs(u(rng)));
    const double radius = std::acos(1.0 - 2.0 * area);
    const double amp = 0.1 + 5.0 * std::abs(u(rng));
    const ScalarField bump =
        sample_field(mesh, [&](const Vec3& p) { return amp * cap_bump(p, c, radius); });
    van = std::max(van, std::abs(zeta(bump)));
    // Monotone reparametrizations t^3 + t and e^t.
    auto cubic = [](double t) { return t * t * t + t; };
    auto expo = [](double t) { return std::exp(t); };
    comp = std::max({comp, std::abs(zeta(f.map(cubic)) - cubic(zf)),
                     std::abs(zeta(f.map(expo)) - expo(zf))});
  }
  CheckResult r;
  r.passed = lin <= 1e-9 && mono <= 1e-9 && lip <= 1e-9 && van <= 0.02 && comp <= 0.02;
  r.detail = fmt("200 cases each; max defects: linear %.1e, monotone %.1e, Lipschitz %.1e, "
                 "vanishing %.1e, u o F %.1e",
                 lin, std::max(mono, 0.0), std::max(lip, 0.0), van, comp);
  return r;
}

CheckResult check_composition(Suite& s) {
  const int level = s.opt().level;
  std::vector<double> times;
  for (int k = 1; k <= 10; ++k) times.push_back(0.1 * k);
  const auto reps = flow_composition_sweep(s.coord_square(level, 0), s.coord_square(level, 1),
                                           times);
  int passed = 0;
  double worst_ratio = 0.0;
  for (const auto& rep : reps) {
    passed += rep.satisfied;
    worst_ratio = std::max(worst_ratio, rep.residual / rep.bound);
  }
  CheckResult r;
  r.passed = passed == static_cast<int>(reps.size());
  r.detail = fmt("%d/%zu times pass; t = 0.1: %.4f <= %.4f; max residual/bound %.3f; "
                 "conservation %.1e",
                 passed, reps.size(), reps[0].residual, reps[0].bound, worst_ratio,
                 reps[0].conservation_residual);
  return r;
}

CheckResult check_measurement(Suite& s) {
  const int level = s.opt().level;
  const ScalarField f1 = s.coord_square(level, 0);
  const ScalarField f2 = s.coord_square(level, 1);
  MeasurementOptions mo;
  mo.sample_level = std::min(s.opt().sample_level, level);
  const QuasiStateConfig cfg{0.5};

  const MeasurementReport ideal = simulate_measurement(f1, f2, 50.0, 0.0, mo, cfg);
  const bool a = ideal.delta == 0.0;

  bool b = true, c = ideal.pointwise_residual <= 1e-4;
  double bound200 = 0.0;
  std::string runs;
  for (const auto& [T, eps] : {std::pair{50.0, 1.0}, {200.0, 1.0}, {50.0, 0.5}}) {
    const MeasurementReport rep = simulate_measurement(f1, f2, T, eps, mo, cfg);
    b = b && rep.satisfied;
    c = c && rep.pointwise_residual <= 1e-4;
    if (T == 200.0) bound200 = *rep.bound;
    runs += fmt(" (%g,%g): %.4f >= %.4f;", T, eps, rep.delta, *rep.bound);
  }
  const bool bound_ok = std::abs(bound200 - 0.459) <= 0.005;

  const ScalingReport s1 = scaling_checks(f1, f2, 10.0, 0.3, 2.0, mo);
  const bool d = s1.time_residual <= 1e-4 && s1.energy_residual <= 1e-4;

  CheckResult r;
  r.passed = a && b && bound_ok && c && d;
  r.detail = fmt("(a) eps = 0 delta %g;%s (c) %s; (d) scaling residuals %.1e, %.1e",
                 ideal.delta, runs.c_str(), c ? "F1'+F2' = F1+F2 within 1e-4" : "FAILED",
                 s1.time_residual, s1.energy_residual);
  return r;
}

CheckResult check_partitions(Suite& s) {
  const MeshPtr mesh = s.mesh(s.opt().level);
  const ExperimentResult res =
      scaling_experiment(mesh, {8, 16, 32}, {1, 2, 4, 8}, QuasiStateConfig{0.5});
  bool rows_ok = true;
  double scaling_err = 0.0, slope_err = 0.0;
  std::map<int, double> base;
  for (const auto& row : res.rows) {
    rows_ok = rows_ok && row.satisfied;
    if (row.m == 1) base[row.N] = row.measured_max_bracket;
  }
  for (const auto& row : res.rows)
    scaling_err = std::max(scaling_err, std::abs(row.measured_max_bracket * row.m * row.m /
                                                     base[row.N] - 1.0));
  for (double slope : res.slopes) slope_err = std::max(slope_err, std::abs(slope + 2.0));
  CheckResult r;
  r.passed = rows_ok && scaling_err < 1e-10 && slope_err <= 0.15;
  const auto& first = res.rows.front();
  r.detail = fmt("N = 8, 16, 32 x m = 1, 2, 4, 8: all rows above bound %s; N = 8: %.4g >= %.4g; "
                 "m^-2 rel. error %.1e; slope error %.1e",
                 rows_ok ? "yes" : "no", first.measured_max_bracket, first.proof_bound,
                 scaling_err, slope_err);
  return r;
}

CheckResult check_convergence(Suite& s) {
  const int hi = s.opt().level;
  const int lo = hi - 1;
  const Values a = quasi_state_values(s, lo);
  const Values b = quasi_state_values(s, hi);
  auto errors = [](const Values& v) {
    return std::array<double, 6>{std::abs(v.zx),          std::abs(v.zy),
                                 std::abs(v.zz),          std::abs(v.zxy - 1.0),
                                 std::abs(v.pi - 1.0),    std::abs(v.bracket - kBracketExact)};
  };
  const auto ea = errors(a), eb = errors(b);
  bool ok = true;
  for (std::size_t i = 0; i < ea.size(); ++i) ok = ok && eb[i] <= ea[i];
  CheckResult r;
  r.passed = ok;
  r.detail = fmt("level %d -> %d: |Pi - 1| %.2e -> %.2e, |zeta(x^2+y^2) - 1| %.2e -> %.2e, "
                 "bracket error %.2e -> %.2e",
                 lo, hi, ea[4], eb[4], ea[3], eb[3], ea[5], eb[5]);
  return r;
}

const char* const kClaims[] = {
    "quasi-state values of x^2, y^2, z^2, x^2+y^2 and Pi(x^2, y^2)",
    "sup norm of {x^2, y^2}",
    "bracket inequality Pi <= sqrt(2C ||{F,G}||) on random cubics",
    "robustness curve (1 - 2 eps)^2 / 4 for C = 2",
    "contour-tree median agrees with the flood-fill oracle",
    "quasi-state axioms (quasi-linearity, monotonicity, Lipschitz, vanishing, u o F)",
    "flow composition ||G o f_t - G|| <= t ||{F,G}||, F = x^2, G = y^2",
    "measurement error bound for the pointer model, F1 = x^2, F2 = y^2",
    "partition of unity bracket bound and m^-2 duplication law",
    "errors of the value checks do not grow under refinement",
};

}  // namespace

void VerifyOptions::validate() const {
  if (level < 1 || level > kMaxSubdivisionLevel)
    throw ArgumentError("verify level must be in [1, " + std::to_string(kMaxSubdivisionLevel) +
                        "]");
  if (oracle_level < 0 || oracle_level > kMaxSubdivisionLevel)
    throw ArgumentError("oracle level out of range");
  if (sample_level < 0 || sample_level > kMaxSubdivisionLevel)
    throw ArgumentError("sample level out of range");
  for (int id : only)
    if (id < 1 || id > 10) throw ArgumentError("criterion ids are 1..10");
}

std::vector<CheckResult> run_verify_suite(
    const VerifyOptions& options, const std::function<void(const CheckResult&)>& on_result) {
  options.validate();
  using Check = CheckResult (*)(Suite&);
  static const Check checks[] = {check_values,     check_bracket,     check_inequality,
                                 check_robustness, check_oracle,      check_axioms,
                                 check_composition, check_measurement, check_partitions,
                                 check_convergence};
  Suite suite(options);
  std::vector<CheckResult> out;
  for (int id = 1; id <= 10; ++id) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = checks[id - 1](suite);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.id = id;
    r.claim = kClaims[id - 1];
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CheckResult& r) {
  return fmt("%s %2d  %s (%.1f s)\n        %s", r.passed ? "PASS" : "FAIL", r.id, r.claim.c_str(),
             r.seconds, r.detail.c_str());
}

}  // namespace qstate
