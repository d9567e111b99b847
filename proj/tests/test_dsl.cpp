#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <tsforge/dsl.hpp>
#include <tsforge/rng.hpp>

#include "support/helpers.hpp"

using namespace tsforge;

namespace {

double eval_text(const std::string& text, std::int64_t t,
                 const VarReader* reader = nullptr, int var_count = 10) {
  return evaluate(parse_expression(text, var_count), EvalContext{t, reader});
}

}  // namespace

TEST_CASE("arithmetic precedence and associativity") {
  CHECK(eval_text("1+2*3", 0) == 7.0);
  CHECK(eval_text("2*3+4", 0) == 10.0);
  CHECK(eval_text("(1+2)*3", 0) == 9.0);
  CHECK(eval_text("10-2-3", 0) == 5.0);    // left associative
  CHECK(eval_text("24/4/2", 0) == 3.0);    // left associative
  CHECK(eval_text("2^3^2", 0) == 512.0);   // right associative
  CHECK(eval_text("-2^2", 0) == -4.0);     // power binds tighter than minus
  CHECK(eval_text("(-2)^2", 0) == -4.0);   // power preserves the base's sign
  CHECK(eval_text("2^-2", 0) == 0.25);
  CHECK(eval_text("--3", 0) == 3.0);
  CHECK(eval_text("2*-3", 0) == -6.0);
}

TEST_CASE("numbers, whitespace, and the time symbol") {
  CHECK(eval_text("0.5", 0) == 0.5);
  CHECK(eval_text(".5", 0) == 0.5);
  CHECK(eval_text("2.86", 0) == 2.86);
  CHECK(eval_text("1e3", 0) == 1000.0);
  CHECK(eval_text("t", 42) == 42.0);
  CHECK(eval_text("  1 +\t2 * sin( t )  ", 0) == 1.0);
  CHECK(eval_text("( t - 4 ) * 2", 6) == 4.0);
}

TEST_CASE("functions apply the guarded semantics") {
  CHECK(eval_text("sin(0)", 0) == 0.0);
  CHECK(eval_text("cos(0)", 0) == 1.0);
  CHECK(eval_text("sqrt(-9)", 0) == 3.0);
  CHECK(eval_text("log(0)", 0) == Catch::Approx(std::log(1e-8)));
  CHECK(eval_text("abs(-2.5)", 0) == 2.5);
  CHECK(eval_text("1/0", 0) == Catch::Approx(1e8));
  CHECK(eval_text("(-8)^2", 0) == Catch::Approx(-64.0));  // sign-preserving power
}

TEST_CASE("variable references read the lagged history") {
  testsupport::HashReader reader;
  CHECK(eval_text("x3[t-2]", 9, &reader) == reader.at(3, 7));
  CHECK(eval_text("2*x0[t-1]+x1[t-4]", 10, &reader) ==
        Catch::Approx(2.0 * reader.at(0, 9) + reader.at(1, 6)));
}

TEST_CASE("window aggregates parse with (variable, lag_from, lag_to)") {
  class TimeReader : public VarReader {
   public:
    double at(int, std::int64_t t) const override {
      return static_cast<double>(t);
    }
  };
  TimeReader reader;
  CHECK(eval_text("wsum(x0,3,1)", 10, &reader) == 24.0);
  CHECK(eval_text("wmean(x0, 3, 1)", 10, &reader) == 8.0);
  const double newest = 8.0, oldest = 6.0;
  CHECK(eval_text("integral(x2,4,2)", 10, &reader) ==
        Catch::Approx((newest * newest - oldest * oldest) / 2.0));
}

TEST_CASE("parse errors carry a kind and a position") {
  const auto expect_kind = [](const std::string& text, ParseError::Kind kind,
                              int var_count = 5) {
    try {
      parse_expression(text, var_count);
      FAIL("expected a parse error for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.kind() == kind);
      CHECK(e.position() >= 0);
      CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
  };

  expect_kind("", ParseError::Kind::Syntax);
  expect_kind("1+", ParseError::Kind::Syntax);
  expect_kind("(1+2", ParseError::Kind::Syntax);
  expect_kind("1+2)", ParseError::Kind::Syntax);
  expect_kind("1 2", ParseError::Kind::Syntax);
  expect_kind("x0[t+1]", ParseError::Kind::Syntax);
  expect_kind("x0[s-1]", ParseError::Kind::Syntax);
  expect_kind("foo(1)", ParseError::Kind::UnknownFunction);
  expect_kind("x9[t-1]", ParseError::Kind::UnknownVariable);
  expect_kind("x0[t-0]", ParseError::Kind::ZeroLag);
  expect_kind("integral(x0,2,2)", ParseError::Kind::Syntax);
  expect_kind("integral(x0,1,3)", ParseError::Kind::Syntax);
  expect_kind("wsum(x0,0,0)", ParseError::Kind::ZeroLag);
}

TEST_CASE("unknown-variable message names the variable and the bound") {
  try {
    parse_expression("x7[t-1]", 3);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x7") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
}

TEST_CASE("printing folds negated constants and round-trips text") {
  CHECK(to_string(parse_expression("-3", 1)) == "-3");
  CHECK(to_string(parse_expression("1+2*3", 1)) == "1+2*3");
  CHECK(to_string(parse_expression("(1+2)*3", 1)) == "(1+2)*3");
  CHECK(to_string(parse_expression("2^3^2", 1)) == "2^3^2");
  CHECK(to_string(parse_expression("-2^2", 1)) == "-2^2");
  CHECK(to_string(parse_expression("cos(9*(t-4))/sin(9)", 1)) ==
        "cos(9*(t-4))/sin(9)");
  CHECK(to_string(parse_expression("sin(t-3)-integral(x2,3,1)+x3[t-3]/2", 5)) ==
        "sin(t-3)-integral(x2,3,1)+x3[t-3]/2");

  // Printing is a fixed point after one round trip.
  const std::string once =
      to_string(parse_expression("-(2+t)*abs(x1[t-2])^2/wmean(x1,5,2)", 4));
  CHECK(to_string(parse_expression(once, 4)) == once);
}

TEST_CASE("round trip preserves evaluation bit for bit") {
  Rng rng(20240601);
  testsupport::HashReader reader(3);
  for (int i = 0; i < 1000; ++i) {
    const ExprPtr tree = testsupport::random_tree(rng, 5, 5, 6);
    const std::string text = to_string(tree);
    ExprPtr back;
    REQUIRE_NOTHROW(back = parse_expression(text, 5));
    for (int j = 0; j < 20; ++j) {
      const std::int64_t t = static_cast<std::int64_t>(rng.index(200));
      const EvalContext ctx{t, &reader};
      const double a = evaluate(tree, ctx);
      const double b = evaluate(back, ctx);
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("shortest-round-trip constants survive printing") {
  for (double v : {0.1, 2.86, -4.75, 1e-8, 123456.789, 0.333333333333333314}) {
    const ExprPtr c = make_const(v);
    const ExprPtr back = parse_expression(to_string(c), 1);
    CHECK(evaluate(back, EvalContext{0, nullptr}) ==
          evaluate(c, EvalContext{0, nullptr}));
  }
}
