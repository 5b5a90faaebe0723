#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "qstate/errors.hpp"
#include "qstate/report_io.hpp"

using namespace qstate;

TEST_SUITE("report_io") {

TEST_CASE("real formatting reads back exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.0}) CHECK(std::stod(format_real(v)) == v);
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV quoting round trip") {
  const std::vector<std::vector<std::string>> rows{
      {"plain", "with,comma", "with \"quote\""}, {"multi\nline", "", "end"}};
  std::ostringstream os;
  {
    CsvWriter w(os, {"a", "b", "c"});
    for (const auto& r : rows) w.row(r);
    CHECK_THROWS_AS(w.row({"too", "short"}), ArgumentError);
  }
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a\"b") == "\"a\"\"b\"");
  std::istringstream is(os.str());
  const auto back = read_csv(is);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(back[1] == rows[0]);
  CHECK(back[2] == rows[1]);
}

TEST_CASE("key = value configuration") {
  std::istringstream is(
      "# comment\n"
      "level = 5\n"
      "\n"
      "C=2.5\n"
      "f = x^2 + y^2\n"
      "eps = 0.1, 0.2,0.3\n");
  const KeyValueConfig c = KeyValueConfig::parse(is);
  CHECK(c.get_int("level") == 5);
  CHECK(c.get_real("C") == 2.5);
  CHECK(c.get_string("f") == "x^2 + y^2");
  CHECK(c.get_reals("eps") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_FALSE(c.has("missing"));
  CHECK_THROWS_AS(c.get_string("missing"), ArgumentError);
  CHECK_THROWS_AS(c.get_int("f"), ArgumentError);

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(dup), ArgumentError);
  std::istringstream bare("just words\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bare), ArgumentError);
}

TEST_CASE("canonical table headers") {
  std::ostringstream os;
  write_inequality_csv(os, {InequalityReport{1.0, 9.6, 3.1, 0.5, true}});
  CHECK(os.str().rfind("pi,bracket_norm,bound,C,satisfied\r\n", 0) == 0);

  std::ostringstream ps;
  ExperimentResult r;
  r.rows.push_back({8, 2, 16, 0.5, 0.01, 0.0, true});
  write_partition_csv(ps, r);
  CHECK(ps.str().rfind("N,m,N_eff,measured_max_bracket,proof_bound,satisfied\r\n", 0) == 0);

  RobustnessReport rob;
  rob.upsilon_curve = {{0.1, 0.2}};
  std::ostringstream rs;
  write_robustness_csv(rs, rob);
  CHECK(rs.str().rfind("epsilon,upsilon_lower\r\n", 0) == 0);
}

TEST_CASE("JSON reports use null for non-finite values") {
  ExperimentResult r;
  r.rows.push_back({8, 1, 8, 0.5, 0.01, 0.0, true});
  r.slopes.push_back(std::numeric_limits<double>::quiet_NaN());
  const Json j = to_json(r);
  CHECK(j["slopes"][0].is_null());
  CHECK(j["rows"][0]["N_eff"] == 8);
  const Json k = to_json(InequalityReport{1.0, 9.6, 3.1, 0.5, true});
  CHECK(k["satisfied"] == true);
}

TEST_CASE("key-value reports read back as configuration") {
  RobustnessReport r = robustness_from_pi(1.0, QuasiStateConfig{2.0}, {0.1, 0.25});
  std::ostringstream os;
  write_key_values(os, to_json(r));
  std::istringstream is(os.str());
  const KeyValueConfig kv = KeyValueConfig::parse(is);
  CHECK(kv.get_real("pi") == 1.0);
  CHECK(kv.get_string("vacuous") == "false");
  CHECK(kv.get_real("curve.1.epsilon") == 0.25);
  CHECK(kv.get_real("curve.1.upsilon_lower") == r.upsilon_curve[1].second);
  CHECK_THROWS_AS(write_key_values(os, Json::array()), ArgumentError);
}

TEST_CASE("SVG plot") {
  std::ostringstream os;
  write_svg_plot(os, "robustness <curve>", "epsilon", "upsilon",
                 {{"C = 0.5", {{0.0, 1.0}, {0.25, 0.25}, {0.5, 0.0}}}});
  const std::string s = os.str();
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("&lt;curve&gt;") != std::string::npos);
  CHECK(s.find("<polyline") != std::string::npos);
}

}  // TEST_SUITE
