#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tsforge/errors.hpp"
#include "tsforge/expr.hpp"
#include "tsforge/params.hpp"
#include "tsforge/rng.hpp"

namespace tsforge {

// Operator sampling damps amplifying operators on already-amplified operands
// (and vice versa): weight = exp(-kGrowthDamping * score * op_growth),
// clipped before normalization.
inline constexpr double kGrowthDamping = 0.5;
inline constexpr double kWeightClipLo = 0.01;
inline constexpr double kWeightClipHi = 100.0;

// After this many unary wraps an operand only takes part in proper binary
// merges, so the pool provably shrinks to a single expression.
inline constexpr int kMaxUnaryWraps = 3;

inline double sample_constant(Rng& rng) {
  return std::round(rng.uniform(-5.0, 5.0) * 100.0) / 100.0;
}

struct PoolItem {
  ExprPtr expr;
  int wraps = 0;
};
using OperandPool = std::vector<PoolItem>;

// Starting operands: one lagged reference per parent, optionally one window
// integral over a parent, n_const constants, and for exogenous variables a
// (t - lag) term so the result can depend on time. Padded to two operands so
// at least one merge happens.
inline OperandPool initialize_leaves(const std::vector<int>& parents,
                                     const GenerationParams& params,
                                     Rng& rng) {
  OperandPool pool;
  for (int p : parents) {
    pool.push_back(
        {make_var(p, static_cast<int>(rng.uniform_int(1, params.max_lag))),
         0});
  }
  if (params.enable_window_agg && !parents.empty() && params.max_lag >= 2 &&
      rng.bernoulli(0.5)) {
    const int var = parents[rng.index(parents.size())];
    const int a = static_cast<int>(rng.uniform_int(1, params.max_lag));
    int b = static_cast<int>(rng.uniform_int(1, params.max_lag - 1));
    if (b >= a) ++b;
    pool.push_back(
        {make_window(AggKind::Integral, var, std::max(a, b), std::min(a, b)),
         0});
  }
  for (int i = 0; i < params.n_const; ++i) {
    pool.push_back({make_const(sample_constant(rng)), 0});
  }
  if (parents.empty()) {
    pool.push_back(
        {make_binary(
             OpId::Sub, make_time(),
             make_const(static_cast<double>(rng.uniform_int(1, params.max_lag)))),
         0});
  }
  while (pool.size() < 2) {
    pool.push_back({make_const(sample_constant(rng)), 0});
  }
  return pool;
}

namespace detail {

inline const std::vector<OpId>& all_operators() {
  static const std::vector<OpId> ids = [] {
    std::vector<OpId> v;
    for (const OperatorSpec& spec : catalog()) v.push_back(spec.id);
    return v;
  }();
  return ids;
}

inline const std::vector<OpId>& shrinking_operators() {
  static const std::vector<OpId> ids = {OpId::Add, OpId::Sub, OpId::Mul,
                                        OpId::Div};
  return ids;
}

}  // namespace detail

inline OpId pick_operator_weighted(int operand_score, Rng& rng,
                                   const std::vector<OpId>& candidates) {
  std::vector<double> weights(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double raw = std::exp(-kGrowthDamping * operand_score *
                                op_spec(candidates[i]).growth_score);
    weights[i] = std::clamp(raw, kWeightClipLo, kWeightClipHi);
    total += weights[i];
  }
  double u = rng.uniform(0.0, total);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    u -= weights[i];
    if (u <= 0.0) return candidates[i];
  }
  return candidates.back();
}

inline OpId pick_operator_weighted(int operand_score, Rng& rng) {
  return pick_operator_weighted(operand_score, rng, detail::all_operators());
}

namespace detail {

inline PoolItem take_random(OperandPool& pool, Rng& rng) {
  const std::size_t i = rng.index(pool.size());
  PoolItem item = std::move(pool[i]);
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
  return item;
}

}  // namespace detail

// One merge: pop a random operand, sample an operator weighted against the
// operand's cumulative growth score, and either wrap the operand (unary, or
// pow with a small constant exponent) or combine it with a second popped
// operand. Wrapping keeps the pool size; combining shrinks it by one.
inline void merge_step(OperandPool& pool, Rng& rng) {
  assert(pool.size() >= 2);
  PoolItem e1 = detail::take_random(pool, rng);
  const int score = cumulative_growth_score(*e1.expr);
  const OpId op = e1.wraps >= kMaxUnaryWraps
                      ? pick_operator_weighted(score, rng,
                                               detail::shrinking_operators())
                      : pick_operator_weighted(score, rng);
  const OperatorSpec& spec = op_spec(op);
  if (spec.arity == 1) {
    pool.push_back({make_unary(op, std::move(e1.expr)), e1.wraps + 1});
    return;
  }
  if (op == OpId::Pow) {
    // Exponent restricted to 2 or 3; free-form exponents explode too fast
    // for the score system to compensate.
    pool.push_back(
        {make_binary(OpId::Pow, std::move(e1.expr),
                     make_const(static_cast<double>(rng.uniform_int(2, 3)))),
         e1.wraps + 1});
    return;
  }
  PoolItem e2 = detail::take_random(pool, rng);
  pool.push_back(
      {make_binary(op, std::move(e1.expr), std::move(e2.expr)), 0});
}

// Synthesizes the generative function for one variable. Every parent ends up
// referenced at some lag in [1, max_lag]. Exogenous functions (no parents)
// must vary over t in [0, 100) with zero history; constant candidates are
// re-rolled from a fresh substream, up to 100 attempts.
inline ExprPtr generate_function(const std::vector<int>& parents,
                                 bool is_exogenous,
                                 const GenerationParams& params, Rng& rng) {
  assert(is_exogenous == parents.empty());
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng sub = rng.substream(static_cast<std::uint64_t>(attempt));
    OperandPool pool = initialize_leaves(parents, params, sub);
    while (pool.size() > 1) merge_step(pool, sub);
    ExprPtr f = pool.front().expr;

#ifndef NDEBUG
    const auto lags = required_lags(*f);
    assert(lags.size() == parents.size());
    for (int p : parents) assert(lags.count(p) == 1);
#endif

    if (!is_exogenous) return f;
    const double first = evaluate(*f, EvalContext{0, nullptr});
    for (std::int64_t t = 1; t < 100; ++t) {
      if (evaluate(*f, EvalContext{t, nullptr}) != first) return f;
    }
  }
  throw GenerationExhausted(
      "exogenous function stayed constant over t in [0, 100) after 100 "
      "attempts");
}

}  // namespace tsforge
