#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <tsforge/expr.hpp>
#include <tsforge/rng.hpp>

#include "support/helpers.hpp"

using namespace tsforge;

namespace {

double eval_at(const ExprPtr& e, std::int64_t t,
               const VarReader* reader = nullptr) {
  return evaluate(e, EvalContext{t, reader});
}

}  // namespace

TEST_CASE("operator catalog is complete and ordered by id") {
  const auto& table = catalog();
  REQUIRE(table.size() == 13);
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(static_cast<std::size_t>(table[i].id) == i);
  }
  CHECK(op_spec(OpId::Exp).growth_score == 2);
  CHECK(op_spec(OpId::Pow).growth_score == 2);
  CHECK(op_spec(OpId::Mul).growth_score == 1);
  CHECK(op_spec(OpId::Add).growth_score == 0);
  CHECK(op_spec(OpId::Sub).growth_score == 0);
  CHECK(op_spec(OpId::Neg).growth_score == 0);
  CHECK(op_spec(OpId::Abs).growth_score == 0);
  CHECK(op_spec(OpId::Tan).growth_score == 0);
  CHECK(op_spec(OpId::Sqrt).growth_score == -1);
  CHECK(op_spec(OpId::Div).growth_score == -1);
  CHECK(op_spec(OpId::Log).growth_score == -2);
  CHECK(op_spec(OpId::Sin).bounded_output);
  CHECK(op_spec(OpId::Cos).bounded_output);
  CHECK_FALSE(op_spec(OpId::Tan).bounded_output);
  CHECK_FALSE(op_spec(OpId::Abs).bounded_output);
  CHECK(op_spec(OpId::Sin).arity == 1);
  CHECK(op_spec(OpId::Pow).arity == 2);
  CHECK(std::string(op_spec(OpId::Sqrt).name) == "sqrt");
}

TEST_CASE("guarded primitives never produce NaN or infinity") {
  CHECK(guards::div_fn(1.0, 0.0) == Catch::Approx(1e8));
  CHECK(guards::div_fn(1.0, -0.0) == Catch::Approx(1e8));
  CHECK(guards::div_fn(-3.0, 0.0) == Catch::Approx(-3e8));
  CHECK(guards::div_fn(6.0, 3.0) == 2.0);
  CHECK(guards::div_fn(6.0, -3.0) == -2.0);

  CHECK(guards::log_fn(0.0) == Catch::Approx(std::log(1e-8)));
  CHECK(guards::log_fn(-std::exp(1.0)) ==
        Catch::Approx(std::log(std::exp(1.0) + 1e-8)));

  CHECK(guards::sqrt_fn(-4.0) == 2.0);
  CHECK(guards::sqrt_fn(9.0) == 3.0);

  CHECK(guards::pow_fn(-8.0, 2.0) == Catch::Approx(-64.0));
  CHECK(guards::pow_fn(2.0, 3.0) == 8.0);
  CHECK(guards::pow_fn(0.0, -1.0) == Catch::Approx(1e8));
  CHECK(std::isfinite(guards::pow_fn(-2.5, -3.0)));

  CHECK(guards::sign_of(0.0) == 1.0);
  CHECK(guards::sign_of(-0.25) == -1.0);
}

TEST_CASE("finalize replaces NaN with zero and clamps magnitude") {
  CHECK(detail::finalize(std::numeric_limits<double>::quiet_NaN()) == 0.0);
  CHECK(detail::finalize(std::numeric_limits<double>::infinity()) ==
        kValueClamp);
  CHECK(detail::finalize(-std::numeric_limits<double>::infinity()) ==
        -kValueClamp);
  CHECK(detail::finalize(3.0e14) == kValueClamp);
  CHECK(detail::finalize(-3.0e14) == -kValueClamp);
  CHECK(detail::finalize(0.5) == 0.5);
}

TEST_CASE("evaluation clamps at every node, not only at the root") {
  // exp(t) overflows for large t; the clamped child keeps sin's argument
  // finite.
  const ExprPtr inner = make_unary(OpId::Exp, make_time());
  CHECK(eval_at(inner, 10000) == kValueClamp);

  const ExprPtr wrapped = make_unary(OpId::Sin, inner);
  CHECK(eval_at(wrapped, 10000) == Catch::Approx(std::sin(kValueClamp)));

  // Each exp(t) clamps before the subtraction, so the difference is exact
  // zero rather than inf - inf.
  const ExprPtr diff = make_binary(OpId::Sub, make_unary(OpId::Exp, make_time()),
                                   make_unary(OpId::Exp, make_time()));
  CHECK(eval_at(diff, 10000) == 0.0);
}

TEST_CASE("closed-form column: cos(9*(t-4))/sin(9)") {
  const ExprPtr e = make_binary(
      OpId::Div,
      make_unary(OpId::Cos,
                 make_binary(OpId::Mul, make_const(9.0),
                             make_binary(OpId::Sub, make_time(),
                                         make_const(4.0)))),
      make_unary(OpId::Sin, make_const(9.0)));
  CHECK(eval_at(e, 4) == Catch::Approx(1.0 / std::sin(9.0)).epsilon(1e-12));
  for (std::int64_t t = 0; t < 50; ++t) {
    const double expected =
        std::cos(9.0 * (static_cast<double>(t) - 4.0)) / std::sin(9.0);
    CHECK(eval_at(e, t) == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("lagged reads come from the context reader; missing reader reads 0") {
  testsupport::HashReader reader;
  const ExprPtr e = make_var(2, 3);
  CHECK(eval_at(e, 10, &reader) == reader.at(2, 7));
  CHECK(eval_at(e, 0, &reader) == reader.at(2, -3));  // 0 by convention
  CHECK(eval_at(e, 0, &reader) == 0.0);
  CHECK(eval_at(e, 5) == 0.0);  // no reader at all
}

TEST_CASE("window aggregates use the inclusive lag span") {
  // Reader returning t itself makes sums easy to compute by hand.
  class TimeReader : public VarReader {
   public:
    double at(int, std::int64_t t) const override {
      return static_cast<double>(t);
    }
  };
  TimeReader reader;

  const ExprPtr sum = make_window(AggKind::Sum, 0, 3, 1);
  CHECK(eval_at(sum, 10, &reader) == 7.0 + 8.0 + 9.0);

  const ExprPtr mean = make_window(AggKind::Mean, 0, 3, 1);
  CHECK(eval_at(mean, 10, &reader) == 8.0);

  const ExprPtr one = make_window(AggKind::Sum, 0, 5, 5);
  CHECK(eval_at(one, 10, &reader) == 5.0);
}

TEST_CASE("trapezoid integral telescopes to a difference of squares") {
  testsupport::HashReader reader(99);
  const int lag_from = 6;
  const int lag_to = 2;
  const ExprPtr integral = make_window(AggKind::Integral, 1, lag_from, lag_to);

  for (std::int64_t t = 20; t < 40; ++t) {
    const double newest = reader.at(1, t - lag_to);
    const double oldest = reader.at(1, t - lag_from);
    const double expected = (newest * newest - oldest * oldest) / 2.0;
    CHECK(eval_at(integral, t, &reader) ==
          Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("growth score accumulates and bounded operators reset it") {
  const ExprPtr t = make_time();
  CHECK(cumulative_growth_score(make_unary(OpId::Exp, make_unary(OpId::Exp, t))) == 4);
  CHECK(cumulative_growth_score(make_unary(OpId::Sin, make_unary(OpId::Exp, t))) == 0);
  CHECK(cumulative_growth_score(
            make_unary(OpId::Abs,
                       make_unary(OpId::Sin, make_unary(OpId::Exp, t)))) == 0);
  CHECK(cumulative_growth_score(
            make_unary(OpId::Exp, make_unary(OpId::Sin, make_unary(OpId::Exp, t)))) ==
        2);
  CHECK(cumulative_growth_score(
            make_binary(OpId::Mul, make_unary(OpId::Exp, t), t)) == 3);
  CHECK(cumulative_growth_score(make_unary(OpId::Log, t)) == -2);
  CHECK(cumulative_growth_score(
            make_binary(OpId::Pow, t, make_const(2.0))) == 2);
  CHECK(cumulative_growth_score(t) == 0);
}

TEST_CASE("lag analysis reports sorted unique lags and window spans") {
  const ExprPtr e = make_binary(
      OpId::Add,
      make_binary(OpId::Add, make_var(2, 3), make_var(2, 3)),
      make_window(AggKind::Sum, 3, 5, 2));
  const auto reads = lag_reads(e);
  REQUIRE(reads.size() == 2);
  CHECK(reads.at(2) == std::vector<int>{3});
  CHECK(reads.at(3) == std::vector<int>{2, 3, 4, 5});

  const auto required = required_lags(e);
  CHECK(required.at(2) == 3);
  CHECK(required.at(3) == 5);
  CHECK(max_required_lag(*e) == 5);

  const std::vector<ExprPtr> eqs = {make_time(), e, make_var(0, 7)};
  CHECK(max_required_lag(eqs) == 7);
  CHECK(max_required_lag(*make_const(1.0)) == 0);
}

TEST_CASE("evaluation is total over random trees") {
  Rng rng(1234);
  testsupport::HashReader reader(7);
  for (int i = 0; i < 300; ++i) {
    const ExprPtr tree = testsupport::random_tree(rng, 6, 4, 5);
    for (std::int64_t t : {0, 1, 17, 100, 100000}) {
      const double v = eval_at(tree, t, &reader);
      REQUIRE(std::isfinite(v));
      REQUIRE(std::abs(v) <= kValueClamp);
    }
  }
}
