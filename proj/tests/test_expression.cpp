#include <cmath>

#include "doctest.h"
#include "qstate/expression.hpp"
#include "qstate/partitions.hpp"
#include "test_support.hpp"

using namespace qstate;

TEST_SUITE("expression") {

TEST_CASE("sum of squares") {
  const FieldExpression e = parse_expression("x^2 + y^2");
  CHECK(e.evaluate({0.6, 0.8, 0.0}) == doctest::Approx(1.0));
  CHECK(e.evaluate({0, 0, 1}) == 0.0);
  CHECK(e.source() == "x^2 + y^2");
}

TEST_CASE("precedence and associativity") {
  const Vec3 p{0.5, -0.25, 2.0};
  CHECK(parse_expression("1 - 2 - 3").evaluate(p) == -4.0);
  CHECK(parse_expression("2 ^ 3 ^ 2").evaluate(p) == 512.0);
  CHECK(parse_expression("-x^2").evaluate(p) == -0.25);
  CHECK(parse_expression("2 * x + y / 0.5").evaluate(p) == 0.5);
  CHECK(parse_expression("(x + y) * z").evaluate(p) == 0.5);
  CHECK(parse_expression("pi").evaluate(p) == doctest::Approx(std::numbers::pi));
  CHECK(parse_expression("1.5e1").evaluate(p) == 15.0);
  CHECK(parse_expression("2^-1").evaluate(p) == 0.5);
}

TEST_CASE("functions") {
  const Vec3 p{0.3, 0.4, std::sqrt(0.75)};
  CHECK(parse_expression("sin(x) + cos(y)").evaluate(p) == doctest::Approx(std::sin(0.3) + std::cos(0.4)));
  CHECK(parse_expression("exp(z) * sqrt(abs(-x))").evaluate(p) ==
        doctest::Approx(std::exp(p.z) * std::sqrt(0.3)));
  CHECK(parse_expression("cap_bump(0, 0, 1, 0.5)").evaluate(p) ==
        doctest::Approx(cap_bump(p, {0, 0, 1}, 0.5)));
  CHECK(parse_expression("cap_bump(1, 0, 0, 0.5)").evaluate({0, 0, 1}) == 0.0);
}

TEST_CASE("errors report line and column") {
  try {
    parse_expression("x^2 +");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 6);
    CHECK(std::string(e.what()) == "1:6: expected an operand");
  }
  auto column_of = [](const char* s) {
    try {
      parse_expression(s);
    } catch (const ParseError& e) {
      return e.column();
    }
    return 0;
  };
  CHECK(column_of("x + w") == 5);
  CHECK(column_of("sin(x, y)") > 0);
  CHECK(column_of("cap_bump(1, 2)") > 0);
  CHECK(column_of("(x + 1") > 0);
  CHECK(column_of("x $ y") == 3);
  CHECK(column_of("") == 1);
  CHECK(column_of("x y") == 3);

  try {
    parse_expression("x +\n  * y");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
}

TEST_CASE("printing round trips") {
  for (const char* s : {"x^2 + y^2", "-(x - 0.1) * sin(y) / 3", "cap_bump(0, 0, 1, 0.5) ^ 2",
                        "2 ^ 3 ^ 2", "exp(-z) - -x", "0.1 + 1e-300"}) {
    const FieldExpression e = parse_expression(s);
    const FieldExpression r = parse_expression(e.to_string());
    CHECK(r == e);
    CHECK(r.to_string() == e.to_string());
  }
  CHECK_FALSE(parse_expression("x + y") == parse_expression("y + x"));
}

TEST_CASE("sampling an expression") {
  const MeshPtr m = test::mesh(3);
  const ScalarField f = sample_expression(m, parse_expression("x^2 + y^2 + z^2"));
  for (double v : f.values()) CHECK(v == doctest::Approx(1.0));
  CHECK_THROWS_AS(sample_expression(m, parse_expression("1 / (x - x)")), EvaluationError);
}

}  // TEST_SUITE
