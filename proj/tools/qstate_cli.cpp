// qstate: command line front end for the quasi-state laboratory.
//
// Exit status: 0 success, 1 a checked inequality or verify line failed,
// 2 invalid input or a numerical error.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qstate/dynamics.hpp"
#include "qstate/errors.hpp"
#include "qstate/expression.hpp"
#include "qstate/partitions.hpp"
#include "qstate/quasistate.hpp"
#include "qstate/report_io.hpp"
#include "qstate/verify.hpp"

using namespace qstate;

namespace {

struct Common {
  int level = 6;
  double C = 0.5;
  bool json = false;
  bool kv = false;
  bool error_json = false;
  std::string config;
};

struct Args {
  std::string f, g, f1, f2;
  double slack = kInequalitySlack;
  std::vector<double> eps;
  std::vector<double> T{50.0};
  std::vector<double> epsilon{1.0};
  int sample_level = -1;
  double step_angle = StepControl{}.max_step_angle;
  std::vector<int> N{8};
  std::vector<int> m{1, 2, 4, 8};
  double overlap = 0.3;
  std::string csv, svg, field_csv;
  // verify
  std::uint64_t seed = VerifyOptions{}.seed;
  int oracle_level = VerifyOptions{}.oracle_level;
  int verify_sample_level = VerifyOptions{}.sample_level;
  std::vector<int> only;
};

ScalarField field_of(const MeshPtr& mesh, const std::string& source, const char* flag) {
  if (source.empty()) throw ArgumentError(std::string("missing --") + flag);
  return sample_expression(mesh, parse_expression(source));
}

std::string real(double v) { return format_real(v); }

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open " + path + " for writing");
  body(os);
  if (!os) throw ArgumentError("failed writing " + path);
}

void emit(const Common& c, const Json& j, const std::string& text) {
  if (c.json)
    std::cout << j.dump(2) << '\n';
  else if (c.kv)
    write_key_values(std::cout, j);
  else
    std::cout << text;
}

// Options in the config file fill in whatever the command line left unset.
void apply_config(CLI::App& app, CLI::App* sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot open config file " + path);
  const KeyValueConfig cfg = KeyValueConfig::parse(is);
  for (const auto& [key, value] : cfg.entries()) {
    CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt) throw ArgumentError("config key '" + key + "' is not an option of this command");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------------------

int run_zeta(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const double z = zeta(field_of(mesh, a.f, "f"));
  emit(c, Json{{"f", a.f}, {"level", c.level}, {"zeta", z}}, real(z) + "\n");
  return 0;
}

int run_pi(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const ScalarField f = field_of(mesh, a.f, "f");
  const ScalarField g = field_of(mesh, a.g, "g");
  const double zf = zeta(f), zg = zeta(g), zfg = zeta(f + g);
  const double pi = std::abs(zfg - zf - zg);
  emit(c,
       Json{{"f", a.f}, {"g", a.g}, {"level", c.level}, {"zeta_f", zf}, {"zeta_g", zg},
            {"zeta_f_plus_g", zfg}, {"pi", pi}},
       real(pi) + "\n");
  return 0;
}

int run_bracket(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const ScalarField b = poisson_bracket(field_of(mesh, a.f, "f"), field_of(mesh, a.g, "g"));
  const double n = uniform_norm(b);
  if (!a.field_csv.empty())
    write_file(a.field_csv, [&](std::ostream& os) {
      CsvWriter w(os, {"vertex", "x", "y", "z", "bracket"});
      const auto v = mesh->vertices();
      for (std::size_t i = 0; i < v.size(); ++i)
        w.row({std::to_string(i), real(v[i].x), real(v[i].y), real(v[i].z), real(b[i])});
    });
  emit(c, Json{{"f", a.f}, {"g", a.g}, {"level", c.level}, {"bracket_norm", n}},
       "||{F,G}|| = " + real(n) + "\n");
  return 0;
}

int run_inequality(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const InequalityReport r = bracket_inequality_report(
      field_of(mesh, a.f, "f"), field_of(mesh, a.g, "g"), QuasiStateConfig{c.C}, a.slack);
  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& os) { write_inequality_csv(os, {r}); });
  std::ostringstream text;
  write_inequality_csv(text, {r});
  emit(c, to_json(r), text.str());
  return r.satisfied ? 0 : 1;
}

int run_robustness(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  std::vector<double> eps = a.eps;
  if (eps.empty())
    for (int k = 1; k <= 9; ++k) eps.push_back(k / 20.0);
  const RobustnessReport r = robustness_report(field_of(mesh, a.f, "f"),
                                               field_of(mesh, a.g, "g"), QuasiStateConfig{c.C},
                                               eps);
  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& os) { write_robustness_csv(os, r); });
  if (!a.svg.empty())
    write_file(a.svg, [&](std::ostream& os) {
      write_svg_plot(os, "Lower bound on the bracket near (F, G)", "epsilon", "upsilon",
                     {{"(Pi - 2 eps)^2 / 2C, C = " + real(c.C), r.upsilon_curve}});
    });
  std::ostringstream text;
  text << "# Pi = " << real(r.pi_value) << ", upsilon >= " << real(r.upsilon_lower)
       << ", eps_max >= " << real(r.eps_max_lower) << (r.vacuous ? " (vacuous)" : "") << '\n';
  write_robustness_csv(text, r);
  emit(c, to_json(r), text.str());
  return 0;
}

int run_measure(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const ScalarField f1 = field_of(mesh, a.f1, "f1");
  const ScalarField f2 = field_of(mesh, a.f2, "f2");
  MeasurementOptions mo;
  mo.sample_level = a.sample_level;
  mo.step.max_step_angle = a.step_angle;
  mo.validate();
  for (double T : a.T)
    if (!(T > 0.0)) throw ArgumentError("T must be positive");
  for (double e : a.epsilon)
    if (!(e >= 0.0)) throw ArgumentError("epsilon must be nonnegative");

  std::vector<MeasurementReport> rows;
  bool ok = true;
  for (double T : a.T)
    for (double e : a.epsilon) {
      rows.push_back(simulate_measurement(f1, f2, T, e, mo, QuasiStateConfig{c.C}));
      ok = ok && rows.back().satisfied;
    }
  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& os) { write_measurement_csv(os, rows); });
  Json j = Json::array();
  for (const auto& r : rows) j.push_back(to_json(r));
  std::ostringstream text;
  write_measurement_csv(text, rows);
  emit(c, j, text.str());
  return ok ? 0 : 1;
}

int run_partition(const Common& c, const Args& a) {
  const MeshPtr mesh = build_icosphere(c.level);
  const ExperimentResult r = scaling_experiment(mesh, a.N, a.m, QuasiStateConfig{c.C}, a.overlap);
  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& os) { write_partition_csv(os, r); });
  bool ok = true;
  for (const auto& row : r.rows) ok = ok && row.satisfied;
  std::ostringstream text;
  write_partition_csv(text, r);
  for (std::size_t i = 0; i < r.slopes.size(); ++i)
    text << "# N = " << a.N[i] << ": log-log slope over m = " << real(r.slopes[i]) << '\n';
  emit(c, to_json(r), text.str());
  return ok ? 0 : 1;
}

int run_verify(const Common& c, const Args& a) {
  VerifyOptions vo;
  vo.level = c.level;
  vo.oracle_level = std::min(a.oracle_level, c.level);
  vo.sample_level = std::min(a.verify_sample_level, c.level);
  vo.seed = a.seed;
  vo.only = a.only;
  Json lines = Json::array();
  const auto results = run_verify_suite(vo, [&](const CheckResult& r) {
    if (!c.json) std::cout << format_result(r) << std::endl;
    lines.push_back({{"id", r.id},
                     {"claim", r.claim},
                     {"passed", r.passed},
                     {"detail", r.detail},
                     {"seconds", r.seconds}});
  });
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  if (c.json)
    std::cout << Json{{"level", c.level}, {"failed", failed}, {"results", lines}}.dump(2) << '\n';
  else
    std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-state laboratory on the 2-sphere"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  Args a;
  app.add_option("--level", c.level, "icosphere subdivision level")
      ->check(CLI::Range(0, kMaxSubdivisionLevel))
      ->capture_default_str();
  app.add_option("--C", c.C, "defect constant of the quasi-state")->capture_default_str();
  CLI::Option* json_opt = app.add_flag("--json", c.json, "print a JSON report instead of text");
  app.add_flag("--kv", c.kv, "print the report as flat `key = value` lines")->excludes(json_opt);
  app.add_flag("--error-json", c.error_json, "report errors as JSON on stderr");
  app.add_option("--config", c.config, "file of `option = value` lines for unset options");

  auto fg = [&](CLI::App* s) {
    s->add_option("--f", a.f, "expression for F");
    s->add_option("--g", a.g, "expression for G");
  };
  CLI::App* zeta_cmd = app.add_subcommand("zeta", "print zeta(F)");
  zeta_cmd->add_option("--f", a.f, "expression for F");
  CLI::App* pi_cmd = app.add_subcommand("pi", "print Pi(F, G) = |zeta(F+G) - zeta(F) - zeta(G)|");
  fg(pi_cmd);
  CLI::App* bracket_cmd = app.add_subcommand("bracket", "Poisson bracket {F, G} and its norm");
  fg(bracket_cmd);
  bracket_cmd->add_option("--field-csv", a.field_csv, "write the bracket per vertex");
  CLI::App* ineq_cmd =
      app.add_subcommand("inequality", "check Pi(F, G) <= sqrt(2 C ||{F, G}||) + slack");
  fg(ineq_cmd);
  ineq_cmd->add_option("--slack", a.slack, "discretization slack")->capture_default_str();
  ineq_cmd->add_option("--csv", a.csv, "CSV output path");
  CLI::App* rob_cmd = app.add_subcommand("robustness", "robustness report and curve");
  fg(rob_cmd);
  rob_cmd->add_option("--eps", a.eps, "epsilon samples (default 0.05, 0.10, ..., 0.45)")
      ->delimiter(',');
  rob_cmd->add_option("--csv", a.csv, "CSV output path");
  rob_cmd->add_option("--svg", a.svg, "SVG plot path");
  CLI::App* meas_cmd = app.add_subcommand("measure", "pointer-model measurement sweep");
  meas_cmd->add_option("--f1", a.f1, "expression for F1");
  meas_cmd->add_option("--f2", a.f2, "expression for F2");
  meas_cmd->add_option("--T", a.T, "measurement times")->delimiter(',')->capture_default_str();
  meas_cmd->add_option("--epsilon", a.epsilon, "coupling strengths")
      ->delimiter(',')
      ->capture_default_str();
  meas_cmd->add_option("--sample-level", a.sample_level,
                       "icosphere level of the initial points (default: all vertices)");
  meas_cmd->add_option("--step-angle", a.step_angle, "largest rotation per step, radians")
      ->capture_default_str();
  meas_cmd->add_option("--csv", a.csv, "CSV output path");
  CLI::App* part_cmd = app.add_subcommand("partition", "partition of unity experiment");
  part_cmd->add_option("--N", a.N, "base partition sizes")->delimiter(',')->capture_default_str();
  part_cmd->add_option("--m", a.m, "multiplicities")->delimiter(',')->capture_default_str();
  part_cmd->add_option("--overlap", a.overlap, "relative cap enlargement")->capture_default_str();
  part_cmd->add_option("--csv", a.csv, "CSV output path");
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--seed", a.seed, "random seed")->capture_default_str();
  verify_cmd->add_option("--oracle-level", a.oracle_level, "mesh level of the oracle comparison")
      ->capture_default_str();
  verify_cmd->add_option("--sample-level", a.verify_sample_level,
                         "icosphere level of the measurement initial points")
      ->capture_default_str();
  verify_cmd->add_option("--only", a.only, "run only these check ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!c.config.empty()) apply_config(app, sub, c.config);
    if (!(c.C > 0.0) || !std::isfinite(c.C)) throw ArgumentError("--C must be positive");
    const std::string name = sub->get_name();
    if (name == "zeta") return run_zeta(c, a);
    if (name == "pi") return run_pi(c, a);
    if (name == "bracket") return run_bracket(c, a);
    if (name == "inequality") return run_inequality(c, a);
    if (name == "robustness") return run_robustness(c, a);
    if (name == "measure") return run_measure(c, a);
    if (name == "partition") return run_partition(c, a);
    return run_verify(c, a);
  } catch (const std::exception& e) {
    if (c.error_json) {
      Json j{{"error", e.what()}};
      if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        j["line"] = pe->line();
        j["column"] = pe->column();
      }
      std::cerr << j.dump() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return 2;
  }
}
