#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

namespace tsforge {

// ============================================================================
// Expression trees
//
// Generative equations are immutable expression trees over lagged variable
// reads, the timestep, and constants. Evaluation is total: every operator is
// domain-guarded and every node's output is clamped, so a tree can be thrown
// at arbitrary histories without ever producing NaN or Inf.
// ============================================================================

// Evaluation output is clamped to [-kValueClamp, kValueClamp].
inline constexpr double kValueClamp = 1e12;

// Domain guard for division, logarithm and negative-exponent powers.
inline constexpr double kGuardEpsilon = 1e-8;

enum class OpId : std::uint8_t {
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Abs,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

enum class AggKind : std::uint8_t { Integral, Sum, Mean };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ConstExpr {
  double value = 0.0;
};

struct TimeExpr {};

// Reads variable `var` at timestep t - lag. Lags are always >= 1: equations
// never see the current timestep, which keeps evaluation order irrelevant
// within a step.
struct VarRefExpr {
  int var = 0;
  int lag = 1;
};

struct UnaryExpr {
  OpId op = OpId::Neg;
  ExprPtr child;
};

struct BinaryExpr {
  OpId op = OpId::Add;
  ExprPtr left;
  ExprPtr right;
};

// Aggregates variable `var` over the lag window [t - lag_from, t - lag_to],
// with lag_from > lag_to >= 1. Integral is trapezoidal with respect to the
// variable's own values, so it telescopes to (x_new^2 - x_old^2) / 2.
struct WindowAggExpr {
  AggKind kind = AggKind::Sum;
  int var = 0;
  int lag_from = 2;
  int lag_to = 1;
};

struct ExprNode {
  std::variant<ConstExpr, TimeExpr, VarRefExpr, UnaryExpr, BinaryExpr,
               WindowAggExpr>
      v;
};

inline ExprPtr make_const(double value) {
  return std::make_shared<ExprNode>(ExprNode{ConstExpr{value}});
}

inline ExprPtr make_time() {
  return std::make_shared<ExprNode>(ExprNode{TimeExpr{}});
}

inline ExprPtr make_var(int var, int lag) {
  assert(var >= 0 && lag >= 1);
  return std::make_shared<ExprNode>(ExprNode{VarRefExpr{var, lag}});
}

inline ExprPtr make_unary(OpId op, ExprPtr child) {
  return std::make_shared<ExprNode>(ExprNode{UnaryExpr{op, std::move(child)}});
}

inline ExprPtr make_binary(OpId op, ExprPtr left, ExprPtr right) {
  return std::make_shared<ExprNode>(
      ExprNode{BinaryExpr{op, std::move(left), std::move(right)}});
}

inline ExprPtr make_window(AggKind kind, int var, int lag_from, int lag_to) {
  assert(var >= 0 && lag_from > lag_to && lag_to >= 1);
  return std::make_shared<ExprNode>(
      ExprNode{WindowAggExpr{kind, var, lag_from, lag_to}});
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// ----------------------------------------------------------------------------
// Guarded operator implementations
// ----------------------------------------------------------------------------

namespace guards {

inline double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }  // sign(0)=+1

inline double sin_fn(double x) { return std::sin(x); }
inline double cos_fn(double x) { return std::cos(x); }
inline double tan_fn(double x) { return std::tan(x); }  // output clamp tames poles
inline double exp_fn(double x) { return std::exp(x); }
inline double log_fn(double x) { return std::log(std::abs(x) + kGuardEpsilon); }
inline double sqrt_fn(double x) { return std::sqrt(std::abs(x)); }
inline double abs_fn(double x) { return std::abs(x); }
inline double neg_fn(double x) { return -x; }

inline double add_fn(double a, double b) { return a + b; }
inline double sub_fn(double a, double b) { return a - b; }
inline double mul_fn(double a, double b) { return a * b; }

inline double div_fn(double a, double b) {
  return a / (sign_of(b) * std::max(std::abs(b), kGuardEpsilon));
}

// Sign-preserving power: pow(a, b) = sign(a) * |a|^b, with |a| pushed away
// from zero when the exponent is negative.
inline double pow_fn(double a, double b) {
  double base = std::abs(a);
  if (b < 0.0) base = std::max(base, kGuardEpsilon);
  return sign_of(a) * std::pow(base, b);
}

}  // namespace guards

// ----------------------------------------------------------------------------
// Operator catalog
// ----------------------------------------------------------------------------

struct OperatorSpec {
  OpId id;
  std::string_view name;
  int arity;         // 1 or 2
  int growth_score;  // positive amplifies magnitudes, negative attenuates
  bool bounded_output;  // bounded range resets the subtree's growth score
  double (*unary_fn)(double);
  double (*binary_fn)(double, double);
};

// Table order matches OpId so op_spec() can index directly.
inline const std::vector<OperatorSpec>& catalog() {
  static const std::vector<OperatorSpec> table = {
      {OpId::Sin, "sin", 1, 0, true, &guards::sin_fn, nullptr},
      {OpId::Cos, "cos", 1, 0, true, &guards::cos_fn, nullptr},
      {OpId::Tan, "tan", 1, 0, false, &guards::tan_fn, nullptr},
      {OpId::Exp, "exp", 1, 2, false, &guards::exp_fn, nullptr},
      {OpId::Log, "log", 1, -2, false, &guards::log_fn, nullptr},
      {OpId::Sqrt, "sqrt", 1, -1, false, &guards::sqrt_fn, nullptr},
      {OpId::Abs, "abs", 1, 0, false, &guards::abs_fn, nullptr},
      {OpId::Neg, "neg", 1, 0, false, &guards::neg_fn, nullptr},
      {OpId::Add, "add", 2, 0, false, nullptr, &guards::add_fn},
      {OpId::Sub, "sub", 2, 0, false, nullptr, &guards::sub_fn},
      {OpId::Mul, "mul", 2, 1, false, nullptr, &guards::mul_fn},
      {OpId::Div, "div", 2, -1, false, nullptr, &guards::div_fn},
      {OpId::Pow, "pow", 2, 2, false, nullptr, &guards::pow_fn},
  };
  return table;
}

inline const OperatorSpec& op_spec(OpId id) {
  return catalog()[static_cast<std::size_t>(id)];
}

// ----------------------------------------------------------------------------
// Evaluation
// ----------------------------------------------------------------------------

// Provides the values an expression reads. Implementations resolve which
// value track (clean or contaminated) a lagged read sees; timesteps before
// the reader's own history origin must yield the warm-up default 0.0.
class VarReader {
 public:
  virtual ~VarReader() = default;
  virtual double at(int var, std::int64_t t) const = 0;
};

struct EvalContext {
  std::int64_t t = 0;
  // May be null for variable-free expressions; every lagged read then
  // returns the warm-up default 0.0.
  const VarReader* reader = nullptr;
};

namespace detail {

inline double finalize(double x) {
  if (std::isnan(x)) return 0.0;
  if (x > kValueClamp) return kValueClamp;
  if (x < -kValueClamp) return -kValueClamp;
  return x;
}

inline double lagged_read(const EvalContext& ctx, int var, std::int64_t lag) {
  if (ctx.reader == nullptr) return 0.0;
  return ctx.reader->at(var, ctx.t - lag);
}

}  // namespace detail

// Total evaluation: always returns a finite value in [-kValueClamp,
// kValueClamp], for any history and any timestep.
inline double evaluate(const ExprNode& node, const EvalContext& ctx) {
  using detail::finalize;
  return std::visit(
      overloaded{
          [](const ConstExpr& c) { return finalize(c.value); },
          [&](const TimeExpr&) {
            return finalize(static_cast<double>(ctx.t));
          },
          [&](const VarRefExpr& r) {
            return finalize(detail::lagged_read(ctx, r.var, r.lag));
          },
          [&](const UnaryExpr& u) {
            const double x = evaluate(*u.child, ctx);
            return finalize(op_spec(u.op).unary_fn(x));
          },
          [&](const BinaryExpr& b) {
            const double l = evaluate(*b.left, ctx);
            const double r = evaluate(*b.right, ctx);
            return finalize(op_spec(b.op).binary_fn(l, r));
          },
          [&](const WindowAggExpr& w) {
            double acc = 0.0;
            if (w.kind == AggKind::Integral) {
              // Trapezoid of x dx over consecutive window samples.
              for (int k = w.lag_to; k < w.lag_from; ++k) {
                const double newer = detail::lagged_read(ctx, w.var, k);
                const double older = detail::lagged_read(ctx, w.var, k + 1);
                acc += 0.5 * (newer + older) * (newer - older);
              }
            } else {
              for (int k = w.lag_to; k <= w.lag_from; ++k) {
                acc += detail::lagged_read(ctx, w.var, k);
              }
              if (w.kind == AggKind::Mean) {
                acc /= static_cast<double>(w.lag_from - w.lag_to + 1);
              }
            }
            return finalize(acc);
          },
      },
      node.v);
}

inline double evaluate(const ExprPtr& node, const EvalContext& ctx) {
  assert(node != nullptr);
  return evaluate(*node, ctx);
}

// ----------------------------------------------------------------------------
// Tree analysis
// ----------------------------------------------------------------------------

// Sum of operator growth scores over the tree. Bounded-output operators
// (sin, cos) cap their operand's magnitude, so the accumulated score of their
// subtree is discarded rather than propagated.
inline int cumulative_growth_score(const ExprNode& node) {
  return std::visit(
      overloaded{
          [](const ConstExpr&) { return 0; },
          [](const TimeExpr&) { return 0; },
          [](const VarRefExpr&) { return 0; },
          [](const WindowAggExpr&) { return 0; },
          [](const UnaryExpr& u) {
            const OperatorSpec& spec = op_spec(u.op);
            if (spec.bounded_output) return 0;
            return spec.growth_score + cumulative_growth_score(*u.child);
          },
          [](const BinaryExpr& b) {
            return op_spec(b.op).growth_score +
                   cumulative_growth_score(*b.left) +
                   cumulative_growth_score(*b.right);
          },
      },
      node.v);
}

inline int cumulative_growth_score(const ExprPtr& node) {
  return cumulative_growth_score(*node);
}

namespace detail {

inline void accumulate_lag_reads(const ExprNode& node,
                                 std::map<int, std::vector<int>>& out) {
  std::visit(overloaded{
                 [](const ConstExpr&) {},
                 [](const TimeExpr&) {},
                 [&](const VarRefExpr& r) { out[r.var].push_back(r.lag); },
                 [&](const UnaryExpr& u) { accumulate_lag_reads(*u.child, out); },
                 [&](const BinaryExpr& b) {
                   accumulate_lag_reads(*b.left, out);
                   accumulate_lag_reads(*b.right, out);
                 },
                 [&](const WindowAggExpr& w) {
                   for (int k = w.lag_to; k <= w.lag_from; ++k) {
                     out[w.var].push_back(k);
                   }
                 },
             },
             node.v);
}

}  // namespace detail

// Every lag at which the expression reads each variable, sorted and
// de-duplicated. Window aggregates expand to their full span.
inline std::map<int, std::vector<int>> lag_reads(const ExprNode& node) {
  std::map<int, std::vector<int>> out;
  detail::accumulate_lag_reads(node, out);
  for (auto& [var, lags] : out) {
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  }
  return out;
}

inline std::map<int, std::vector<int>> lag_reads(const ExprPtr& node) {
  return lag_reads(*node);
}

// Maximum lag the expression needs per referenced variable.
inline std::map<int, int> required_lags(const ExprNode& node) {
  std::map<int, int> out;
  for (const auto& [var, lags] : lag_reads(node)) {
    out[var] = lags.back();
  }
  return out;
}

inline std::map<int, int> required_lags(const ExprPtr& node) {
  return required_lags(*node);
}

inline int max_required_lag(const ExprNode& node) {
  int w = 0;
  for (const auto& [var, lag] : required_lags(node)) w = std::max(w, lag);
  return w;
}

inline int max_required_lag(const std::vector<ExprPtr>& equations) {
  int w = 0;
  for (const ExprPtr& eq : equations) w = std::max(w, max_required_lag(*eq));
  return w;
}

}  // namespace tsforge
