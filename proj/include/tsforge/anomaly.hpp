#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsforge/errors.hpp"
#include "tsforge/expr.hpp"
#include "tsforge/funcgen.hpp"
#include "tsforge/graph.hpp"
#include "tsforge/params.hpp"
#include "tsforge/rng.hpp"

namespace tsforge {

// Minimum pointwise deviation for a mutation to count as effective inside
// its window.
inline constexpr double kEffectTolerance = 1e-6;

enum class MutationStrategy {
  InsertSubtree,
  DeleteSubtree,
  ReplaceOperator,
  Manual,
};

inline const char* strategy_name(MutationStrategy s) {
  switch (s) {
    case MutationStrategy::InsertSubtree:
      return "insert_subtree";
    case MutationStrategy::DeleteSubtree:
      return "delete_subtree";
    case MutationStrategy::ReplaceOperator:
      return "replace_operator";
    default:
      return "manual";
  }
}

// One anomaly: within [t_start, t_end) (global timesteps, half-open) the
// variable's values come from `mutated` instead of its nominal function.
struct AnomalySpec {
  int var = 0;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  MutationStrategy strategy = MutationStrategy::Manual;
  ExprPtr mutated;
};

struct PlannedWindow {
  int var = 0;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
};

// ----------------------------------------------------------------------------
// Window planning
// ----------------------------------------------------------------------------

// Splits the anomalous-step budget round(ratio * test_length) into window
// lengths by cutting [0, N] at K-1 uniform points, then places each window at
// a uniform start on a uniform variable. Windows on the same variable must
// not overlap; placement is re-rolled up to 50 times per window.
inline std::vector<PlannedWindow> plan_anomalies(const GenerationParams& params,
                                                 Rng& rng) {
  const std::int64_t budget =
      std::llround(params.contamination_ratio *
                   static_cast<double>(params.test_length));
  if (budget <= 0) return {};

  const std::int64_t k =
      params.num_anomalies > 0
          ? params.num_anomalies
          : std::max<std::int64_t>(1, budget / 50);
  std::vector<std::int64_t> cuts;
  cuts.reserve(static_cast<std::size_t>(k) + 1);
  cuts.push_back(0);
  for (std::int64_t i = 0; i + 1 < k; ++i) {
    cuts.push_back(rng.uniform_int(0, budget));
  }
  cuts.push_back(budget);
  std::sort(cuts.begin(), cuts.end());

  std::vector<PlannedWindow> windows;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const std::int64_t len = cuts[i + 1] - cuts[i];
    if (len == 0) continue;

    constexpr int kMaxPlacementRetries = 50;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementRetries; ++attempt) {
      const int var = static_cast<int>(rng.uniform_int(0, params.d - 1));
      const std::int64_t start =
          params.train_length +
          rng.uniform_int(0, params.test_length - len);
      const std::int64_t end = start + len;
      bool overlaps = false;
      for (const PlannedWindow& w : windows) {
        if (w.var == var && start < w.t_end && w.t_start < end) {
          overlaps = true;
          break;
        }
      }
      if (!overlaps) {
        windows.push_back({var, start, end});
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw SchedulingFailed(
          "could not place an anomaly window of length " +
          std::to_string(len) +
          " without same-variable overlap after 50 attempts");
    }
  }
  return windows;
}

// ----------------------------------------------------------------------------
// Propagation
// ----------------------------------------------------------------------------

using PropagationMap = std::map<std::pair<int, int>, bool>;

// Each edge propagates independently with the given probability. Self-loops
// always propagate: a variable's own corruption is visible to its later
// self-reads no matter what, so an edge claiming otherwise would make the
// labels lie about the data.
inline PropagationMap assign_propagation(const DependencyGraph& g, double prob,
                                         Rng& rng) {
  PropagationMap map;
  for (const Edge& e : g.edges) {
    if (e.src == e.dst) {
      map[{e.src, e.dst}] = true;
    } else {
      map[{e.src, e.dst}] = rng.bernoulli(prob);
    }
  }
  return map;
}

inline void apply_propagation(DependencyGraph& g, const PropagationMap& map) {
  for (Edge& e : g.edges) {
    const auto it = map.find({e.src, e.dst});
    assert(it != map.end());
    e.propagates = it->second;
  }
}

// ----------------------------------------------------------------------------
// Tree surgery
// ----------------------------------------------------------------------------

namespace detail {

struct NodePos {
  std::vector<int> path;  // child indices from the root
  int depth = 0;
  int arity = 0;          // 0 for leaves
  OpId op = OpId::Sin;    // meaningful when arity > 0
};

inline void collect_nodes(const ExprNode& node, std::vector<int>& path,
                          int depth, std::vector<NodePos>& out) {
  NodePos pos;
  pos.path = path;
  pos.depth = depth;
  if (const auto* u = std::get_if<UnaryExpr>(&node.v)) {
    pos.arity = 1;
    pos.op = u->op;
    out.push_back(pos);
    path.push_back(0);
    collect_nodes(*u->child, path, depth + 1, out);
    path.pop_back();
    return;
  }
  if (const auto* b = std::get_if<BinaryExpr>(&node.v)) {
    pos.arity = 2;
    pos.op = b->op;
    out.push_back(pos);
    path.push_back(0);
    collect_nodes(*b->left, path, depth + 1, out);
    path.back() = 1;
    collect_nodes(*b->right, path, depth + 1, out);
    path.pop_back();
    return;
  }
  out.push_back(pos);
}

inline std::vector<NodePos> collect_nodes(const ExprNode& root) {
  std::vector<NodePos> out;
  std::vector<int> path;
  collect_nodes(root, path, 0, out);
  return out;
}

inline const ExprNode& node_at(const ExprNode& root,
                               const std::vector<int>& path) {
  const ExprNode* cur = &root;
  for (int step : path) {
    if (const auto* u = std::get_if<UnaryExpr>(&cur->v)) {
      cur = u->child.get();
    } else {
      const auto& b = std::get<BinaryExpr>(cur->v);
      cur = step == 0 ? b.left.get() : b.right.get();
    }
  }
  return *cur;
}

// Rebuilds the tree with the node at `path` replaced. Untouched subtrees are
// shared with the original.
inline ExprPtr replace_at(const ExprNode& root, const std::vector<int>& path,
                          std::size_t step, ExprPtr replacement) {
  if (step == path.size()) return replacement;
  if (const auto* u = std::get_if<UnaryExpr>(&root.v)) {
    return make_unary(u->op,
                      replace_at(*u->child, path, step + 1,
                                 std::move(replacement)));
  }
  const auto& b = std::get<BinaryExpr>(root.v);
  if (path[step] == 0) {
    return make_binary(b.op,
                       replace_at(*b.left, path, step + 1,
                                  std::move(replacement)),
                       b.right);
  }
  return make_binary(b.op, b.left,
                     replace_at(*b.right, path, step + 1,
                                std::move(replacement)));
}

inline ExprPtr replace_at(const ExprNode& root, const std::vector<int>& path,
                          ExprPtr replacement) {
  return replace_at(root, path, 0, std::move(replacement));
}

}  // namespace detail

// Picks the subtree a deletion should remove: uniform among non-root nodes
// whose depth lies within one of the median non-root depth. Returns nothing
// for a single-node tree.
inline std::optional<std::vector<int>> select_deletion_node(const ExprNode& f,
                                                            Rng& rng) {
  const auto nodes = detail::collect_nodes(f);
  if (nodes.size() < 2) return std::nullopt;

  std::vector<int> depths;
  for (const auto& n : nodes) {
    if (!n.path.empty()) depths.push_back(n.depth);
  }
  std::sort(depths.begin(), depths.end());
  const int median = depths[(depths.size() - 1) / 2];

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].path.empty() && std::abs(nodes[i].depth - median) <= 1) {
      candidates.push_back(i);
    }
  }
  assert(!candidates.empty());
  return nodes[candidates[rng.index(candidates.size())]].path;
}

// ----------------------------------------------------------------------------
// Mutation
// ----------------------------------------------------------------------------

namespace detail {

// Fresh shallow subtree over the allowed variables, used as the inserted
// operand.
inline ExprPtr random_subtree(const std::vector<int>& vars,
                              const GenerationParams& params, Rng& rng) {
  auto leaf = [&]() -> ExprPtr {
    if (!vars.empty() && rng.bernoulli(0.5)) {
      return make_var(vars[rng.index(vars.size())],
                      static_cast<int>(rng.uniform_int(1, params.max_lag)));
    }
    return make_const(sample_constant(rng));
  };
  const double shape = rng.uniform01();
  if (shape < 1.0 / 3.0) return leaf();
  if (shape < 2.0 / 3.0) {
    static const OpId unary[] = {OpId::Sin, OpId::Cos,  OpId::Tan, OpId::Exp,
                                 OpId::Log, OpId::Sqrt, OpId::Abs, OpId::Neg};
    return make_unary(unary[rng.index(8)], leaf());
  }
  static const OpId binary[] = {OpId::Add, OpId::Sub, OpId::Mul, OpId::Div,
                                OpId::Pow};
  const OpId op = binary[rng.index(5)];
  if (op == OpId::Pow) {
    return make_binary(op, leaf(),
                       make_const(static_cast<double>(rng.uniform_int(2, 3))));
  }
  return make_binary(op, leaf(), leaf());
}

inline OpId replacement_operator(OpId incumbent, int arity, Rng& rng) {
  std::vector<OpId> alternatives;
  for (const OperatorSpec& spec : catalog()) {
    if (spec.arity == arity && spec.id != incumbent) {
      alternatives.push_back(spec.id);
    }
  }
  return alternatives[rng.index(alternatives.size())];
}

}  // namespace detail

struct MutationResult {
  ExprPtr expr;
  MutationStrategy strategy;
};

// Applies one uniformly chosen mutation strategy. Strategies that need a
// structure the tree does not have (deleting from a single node, swapping an
// operator in an operator-free tree) fall through to subtree insertion,
// which is always possible.
inline MutationResult mutate_once(const ExprNode& f,
                                  const std::vector<int>& vars,
                                  const GenerationParams& params, Rng& rng) {
  const auto nodes = detail::collect_nodes(f);
  MutationStrategy strategy = static_cast<MutationStrategy>(rng.index(3));
  if (strategy == MutationStrategy::DeleteSubtree && nodes.size() < 2) {
    strategy = MutationStrategy::InsertSubtree;
  }
  if (strategy == MutationStrategy::ReplaceOperator) {
    bool any_op = false;
    for (const auto& n : nodes) any_op = any_op || n.arity > 0;
    if (!any_op) strategy = MutationStrategy::InsertSubtree;
  }

  switch (strategy) {
    case MutationStrategy::InsertSubtree: {
      const auto& pos = nodes[rng.index(nodes.size())];
      static const OpId binary[] = {OpId::Add, OpId::Sub, OpId::Mul,
                                    OpId::Div, OpId::Pow};
      const OpId op = binary[rng.index(5)];
      ExprPtr sub = detail::random_subtree(vars, params, rng);
      ExprPtr inner = std::make_shared<const ExprNode>(
          detail::node_at(f, pos.path));
      return {detail::replace_at(f, pos.path,
                                 make_binary(op, std::move(inner),
                                             std::move(sub))),
              MutationStrategy::InsertSubtree};
    }
    case MutationStrategy::DeleteSubtree: {
      const auto path = select_deletion_node(f, rng);
      assert(path.has_value());
      return {detail::replace_at(f, *path, make_const(sample_constant(rng))),
              MutationStrategy::DeleteSubtree};
    }
    default: {
      std::vector<std::size_t> ops;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].arity > 0) ops.push_back(i);
      }
      const auto& pos = nodes[ops[rng.index(ops.size())]];
      const OpId next =
          detail::replacement_operator(pos.op, pos.arity, rng);
      const ExprNode& old = detail::node_at(f, pos.path);
      ExprPtr rebuilt;
      if (pos.arity == 1) {
        rebuilt = make_unary(next, std::get<UnaryExpr>(old.v).child);
      } else {
        const auto& b = std::get<BinaryExpr>(old.v);
        rebuilt = make_binary(next, b.left, b.right);
      }
      return {detail::replace_at(f, pos.path, std::move(rebuilt)),
              MutationStrategy::ReplaceOperator};
    }
  }
}

// ----------------------------------------------------------------------------
// Validated contamination
// ----------------------------------------------------------------------------

struct ContaminationOutcome {
  ExprPtr mutated;
  // Strategy behind the accepted tree, and the first sampled strategy (the
  // latter is what frequency statistics count).
  MutationStrategy strategy = MutationStrategy::InsertSubtree;
  MutationStrategy first_choice = MutationStrategy::InsertSubtree;
  bool used_fallback = false;
  int attempts = 0;
};

namespace detail {

inline bool deviates_in_window(const ExprNode& f, const ExprNode& g,
                               const PlannedWindow& window,
                               const VarReader& clean) {
  for (std::int64_t t = window.t_start; t < window.t_end; ++t) {
    const EvalContext ctx{t, &clean};
    if (std::abs(evaluate(g, ctx) - evaluate(f, ctx)) > kEffectTolerance) {
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Mutates f until the mutant visibly deviates from f somewhere in the window
// (compared on the clean history, which bounds the true first deviation from
// below). After 20 fruitless mutations falls back to adding a constant
// offset; if the clamp swallows the drawn sign, the opposite sign cannot
// also be swallowed.
inline ContaminationOutcome contaminate(const ExprPtr& f,
                                        const std::vector<int>& vars,
                                        const PlannedWindow& window,
                                        const VarReader& clean,
                                        const GenerationParams& params,
                                        Rng& rng) {
  constexpr int kMaxMutations = 20;
  ContaminationOutcome out;
  for (int attempt = 0; attempt < kMaxMutations; ++attempt) {
    MutationResult m = mutate_once(*f, vars, params, rng);
    if (attempt == 0) out.first_choice = m.strategy;
    out.attempts = attempt + 1;
    if (detail::deviates_in_window(*f, *m.expr, window, clean)) {
      out.mutated = std::move(m.expr);
      out.strategy = m.strategy;
      return out;
    }
  }

  out.used_fallback = true;
  out.strategy = MutationStrategy::InsertSubtree;
  const double magnitude = rng.uniform(2.0, 5.0);
  const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
  ExprPtr shifted =
      make_binary(OpId::Add, f, make_const(sign * magnitude));
  if (detail::deviates_in_window(*f, *shifted, window, clean)) {
    out.mutated = std::move(shifted);
    return out;
  }
  out.mutated = make_binary(OpId::Add, f, make_const(-sign * magnitude));
  assert(detail::deviates_in_window(*f, *out.mutated, window, clean));
  return out;
}

}  // namespace tsforge
