#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <tsforge/expr.hpp>
#include <tsforge/rng.hpp>

namespace testsupport {

// Deterministic stand-in history: value depends only on (var, t), bounded,
// nonconstant, no state.
class HashReader : public tsforge::VarReader {
 public:
  explicit HashReader(std::uint64_t salt = 0) : salt_(salt) {}

  double at(int var, std::int64_t t) const override {
    if (t < 0) return 0.0;
    std::uint64_t h = salt_ ^ (static_cast<std::uint64_t>(var) * 0x9e3779b97f4a7c15ULL);
    h ^= static_cast<std::uint64_t>(t) + 0xbf58476d1ce4e5b9ULL + (h << 6) + (h >> 2);
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return (static_cast<double>(h >> 11) * 0x1.0p-53) * 8.0 - 4.0;
  }

 private:
  std::uint64_t salt_;
};

class ZeroReader : public tsforge::VarReader {
 public:
  double at(int, std::int64_t) const override { return 0.0; }
};

// Random expression trees for round-trip and totality tests. Independent of
// the library's own function generator on purpose: it covers shapes that
// generator never emits (windows of every kind, negative and fractional
// constants, deep towers) so the printer/parser pair is exercised beyond the
// trees the product happens to produce.
inline tsforge::ExprPtr random_tree(tsforge::Rng& rng, int depth,
                                    int var_count, int max_lag) {
  using namespace tsforge;
  const auto leaf = [&]() -> ExprPtr {
    switch (rng.index(4)) {
      case 0:
        return make_const(std::round(rng.uniform(-20.0, 20.0) * 1000.0) /
                          1000.0);
      case 1:
        return make_time();
      case 2:
        return make_var(static_cast<int>(rng.index(
                            static_cast<std::size_t>(var_count))),
                        static_cast<int>(rng.uniform_int(1, max_lag)));
      default: {
        const int hi = static_cast<int>(rng.uniform_int(2, max_lag + 1));
        const int lo = static_cast<int>(rng.uniform_int(1, hi - 1));
        const AggKind kind = static_cast<AggKind>(rng.index(3));
        return make_window(kind,
                           static_cast<int>(rng.index(
                               static_cast<std::size_t>(var_count))),
                           hi, lo);
      }
    }
  };
  if (depth <= 0) return leaf();

  switch (rng.index(3)) {
    case 0:
      return leaf();
    case 1: {
      const OpId op = static_cast<OpId>(rng.index(8));  // Sin..Neg
      return make_unary(op, random_tree(rng, depth - 1, var_count, max_lag));
    }
    default: {
      const OpId op =
          static_cast<OpId>(8 + rng.index(5));  // Add..Pow
      return make_binary(op, random_tree(rng, depth - 1, var_count, max_lag),
                         random_tree(rng, depth - 1, var_count, max_lag));
    }
  }
}

inline int node_count(const tsforge::ExprNode& node) {
  using namespace tsforge;
  return std::visit(
      overloaded{
          [](const ConstExpr&) { return 1; },
          [](const TimeExpr&) { return 1; },
          [](const VarRefExpr&) { return 1; },
          [](const WindowAggExpr&) { return 1; },
          [](const UnaryExpr& u) { return 1 + node_count(*u.child); },
          [](const BinaryExpr& b) {
            return 1 + node_count(*b.left) + node_count(*b.right);
          },
      },
      node.v);
}

// Structural sanity: child pointers populated, var/lag/window fields in
// range. Returns false on the first defect.
inline bool well_formed(const tsforge::ExprNode& node, int var_count) {
  using namespace tsforge;
  return std::visit(
      overloaded{
          [](const ConstExpr& c) { return std::isfinite(c.value); },
          [](const TimeExpr&) { return true; },
          [&](const VarRefExpr& r) {
            return r.var >= 0 && r.var < var_count && r.lag >= 1;
          },
          [&](const WindowAggExpr& w) {
            return w.var >= 0 && w.var < var_count && w.lag_to >= 1 &&
                   w.lag_from > w.lag_to;
          },
          [&](const UnaryExpr& u) {
            return op_spec(u.op).arity == 1 && u.child != nullptr &&
                   well_formed(*u.child, var_count);
          },
          [&](const BinaryExpr& b) {
            return op_spec(b.op).arity == 2 && b.left != nullptr &&
                   b.right != nullptr && well_formed(*b.left, var_count) &&
                   well_formed(*b.right, var_count);
          },
      },
      node.v);
}

}  // namespace testsupport
