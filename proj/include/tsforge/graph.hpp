#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsforge/errors.hpp"
#include "tsforge/params.hpp"
#include "tsforge/rng.hpp"

namespace tsforge {

struct Edge {
  int src = 0;
  int dst = 0;
  bool propagates = false;
};

inline bool operator==(const Edge& a, const Edge& b) {
  return a.src == b.src && a.dst == b.dst && a.propagates == b.propagates;
}

// Directed dependency structure over variables 0..d-1. Values flow src -> dst
// with lags >= 1, so cycles and self-loops are fine.
struct DependencyGraph {
  int d = 0;
  int num_communities = 0;
  std::vector<int> community;    // variable -> community index
  std::vector<char> exogenous;   // variable -> nothing feeds into it
  std::vector<Edge> edges;

  std::vector<int> members_of(int c) const {
    std::vector<int> out;
    for (int v = 0; v < d; ++v) {
      if (community[v] == c) out.push_back(v);
    }
    return out;
  }

  int indegree(int v) const {
    int n = 0;
    for (const Edge& e : edges) {
      if (e.dst == v) ++n;
    }
    return n;
  }

  // Sorted, de-duplicated sources feeding v (a self-loop makes v its own
  // parent).
  std::vector<int> parents_of(int v) const {
    std::vector<int> out;
    for (const Edge& e : edges) {
      if (e.dst == v) out.push_back(e.src);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// ----------------------------------------------------------------------------
// Community assignment
// ----------------------------------------------------------------------------

struct CommunityAssignment {
  std::vector<std::vector<int>> communities;
  // Variables reserved as cross-link endpoints; they join a community when
  // the link is realized.
  std::vector<int> unassigned;
};

// Splits variables 0..d-1 into k nonempty groups by cutting a shuffled
// ordering at k-1 distinct positions. `hold_out` variables are set aside for
// cross-link duty (requires d - hold_out >= k).
inline CommunityAssignment assign_communities(int d, int k, int hold_out,
                                              Rng& rng) {
  if (k < 1 || hold_out < 0 || d - hold_out < k) {
    throw InfeasibleParams("cannot split " + std::to_string(d) +
                           " variables into " + std::to_string(k) +
                           " communities with " + std::to_string(hold_out) +
                           " held out");
  }
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  CommunityAssignment out;
  out.unassigned.assign(order.end() - hold_out, order.end());
  const int m = d - hold_out;

  std::vector<int> gaps(static_cast<std::size_t>(m - 1));
  std::iota(gaps.begin(), gaps.end(), 1);
  shuffle(gaps, rng);
  std::vector<int> cuts(gaps.begin(), gaps.begin() + (k - 1));
  cuts.push_back(0);
  cuts.push_back(m);
  std::sort(cuts.begin(), cuts.end());

  out.communities.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    out.communities[static_cast<std::size_t>(c)].assign(
        order.begin() + cuts[static_cast<std::size_t>(c)],
        order.begin() + cuts[static_cast<std::size_t>(c) + 1]);
    std::sort(out.communities[static_cast<std::size_t>(c)].begin(),
              out.communities[static_cast<std::size_t>(c)].end());
  }
  return out;
}

// ----------------------------------------------------------------------------
// Exogenous / endogenous split
// ----------------------------------------------------------------------------

struct ExoSplit {
  std::vector<int> exo;
  std::vector<int> endo;
};

// Splits one community. A singleton community is fully exogenous. Otherwise
// the exogenous count is capped so the endogenous side retains enough
// indegree capacity to connect the whole community: with e exogenous and n
// endogenous members, connectivity needs n * max_indegree >= n + e - 1.
inline ExoSplit pick_exogenous(const std::vector<int>& community,
                               int max_indegree, Rng& rng) {
  assert(!community.empty());
  const int size = static_cast<int>(community.size());
  if (size == 1) {
    return {community, {}};
  }
  const int min_endo = (size - 1 + max_indegree - 1) / max_indegree;
  const int max_exo = size - min_endo;
  const int n_exo = rng.uniform_int(1, max_exo);

  std::vector<int> pool = community;
  shuffle(pool, rng);
  ExoSplit split;
  split.exo.assign(pool.begin(), pool.begin() + n_exo);
  split.endo.assign(pool.begin() + n_exo, pool.end());
  std::sort(split.exo.begin(), split.exo.end());
  std::sort(split.endo.begin(), split.endo.end());
  return split;
}

// ----------------------------------------------------------------------------
// Graph generation
// ----------------------------------------------------------------------------

namespace detail {

struct GraphBuilder {
  int d;
  int max_indegree;
  std::vector<int> indegree;
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;

  GraphBuilder(int d_, int max_indegree_)
      : d(d_), max_indegree(max_indegree_),
        indegree(static_cast<std::size_t>(d_), 0) {}

  bool has(int src, int dst) const { return seen.count({src, dst}) > 0; }

  void add(int src, int dst) {
    assert(!has(src, dst));
    assert(indegree[static_cast<std::size_t>(dst)] < max_indegree);
    seen.insert({src, dst});
    edges.push_back({src, dst, false});
    ++indegree[static_cast<std::size_t>(dst)];
  }
};

// Connects one community: a spanning pass in which every endogenous node
// receives an edge from an already-connected node and every further
// exogenous node sends an edge into an endogenous node with indegree room,
// then uniform fill up to a sampled edge count.
inline void build_community(GraphBuilder& b, const std::vector<int>& members,
                            const ExoSplit& split, Rng& rng) {
  const int size = static_cast<int>(members.size());
  const int n_endo = static_cast<int>(split.endo.size());
  if (n_endo == 0) return;

  std::vector<int> connected;
  connected.push_back(split.exo[rng.index(split.exo.size())]);

  std::vector<int> endo_order = split.endo;
  shuffle(endo_order, rng);
  for (int v : endo_order) {
    const int src = connected[rng.index(connected.size())];
    b.add(src, v);
    connected.push_back(v);
  }
  for (int x : split.exo) {
    if (x == connected.front()) continue;
    std::vector<int> room;
    for (int v : split.endo) {
      if (b.indegree[static_cast<std::size_t>(v)] < b.max_indegree &&
          !b.has(x, v)) {
        room.push_back(v);
      }
    }
    assert(!room.empty());
    b.add(x, room[rng.index(room.size())]);
  }

  // Edge-count target: between |c| and the endogenous indegree budget,
  // capped at the number of distinct (src, dst) pairs.
  const int capacity = n_endo * std::min(b.max_indegree, size);
  const int lo = std::min(size, capacity);
  const int target = rng.uniform_int(lo, capacity);
  int have = size - 1;  // spanning pass edge count
  while (have < target) {
    std::vector<std::pair<int, int>> open;
    for (int v : split.endo) {
      if (b.indegree[static_cast<std::size_t>(v)] >= b.max_indegree) continue;
      for (int s : members) {
        if (!b.has(s, v)) open.push_back({s, v});
      }
    }
    assert(!open.empty());
    const auto [src, dst] = open[rng.index(open.size())];
    b.add(src, dst);
    ++have;
  }
}

}  // namespace detail

// Samples a dependency graph: variables split into communities, each
// community internally connected with at least one exogenous source, and
// (optionally) exactly nb_links edges between distinct communities.
inline DependencyGraph generate_graph(const GenerationParams& params,
                                      Rng& rng) {
  const int d = params.d;
  const int k = params.num_communities;
  if (d < 1 || k < 1 || k > d || params.max_indegree < 1) {
    throw InfeasibleParams("graph parameters out of range");
  }

  const int hold_out =
      params.link_communities ? std::min(params.nb_links, d - k) : 0;
  if (params.link_communities && params.nb_links > 0 && k < 2) {
    throw InfeasibleParams("cross links need at least 2 communities");
  }

  CommunityAssignment assignment = assign_communities(d, k, hold_out, rng);

  DependencyGraph g;
  g.d = d;
  g.num_communities = k;
  g.community.assign(static_cast<std::size_t>(d), -1);
  g.exogenous.assign(static_cast<std::size_t>(d), 0);
  for (int c = 0; c < k; ++c) {
    for (int v : assignment.communities[static_cast<std::size_t>(c)]) {
      g.community[static_cast<std::size_t>(v)] = c;
    }
  }

  detail::GraphBuilder b(d, params.max_indegree);
  std::vector<int> exo_count(static_cast<std::size_t>(k), 0);
  for (int c = 0; c < k; ++c) {
    const auto& members = assignment.communities[static_cast<std::size_t>(c)];
    const ExoSplit split = pick_exogenous(members, params.max_indegree, rng);
    for (int v : split.exo) g.exogenous[static_cast<std::size_t>(v)] = 1;
    exo_count[static_cast<std::size_t>(c)] =
        static_cast<int>(split.exo.size());
    detail::build_community(b, members, split, rng);
  }

  if (params.link_communities) {
    constexpr int kMaxAttempts = 500;
    std::vector<int> pending = assignment.unassigned;
    for (int link = 0; link < params.nb_links; ++link) {
      const int u = pending.empty() ? -1 : pending.back();
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        const int ca = rng.uniform_int(0, k - 1);
        int cb = rng.uniform_int(0, k - 2);
        if (cb >= ca) ++cb;

        int a, bnode;
        int host = -1;
        if (u >= 0) {
          host = rng.bernoulli(0.5) ? ca : cb;
          const int other = host == ca ? cb : ca;
          const auto oth = g.members_of(other);
          a = u;
          bnode = oth[rng.index(oth.size())];
        } else {
          const auto ma = g.members_of(ca);
          const auto mb = g.members_of(cb);
          a = ma[rng.index(ma.size())];
          bnode = mb[rng.index(mb.size())];
        }
        int src = a, dst = bnode;
        if (rng.bernoulli(0.5)) std::swap(src, dst);

        // The receiving end must keep every invariant intact: indegree room
        // (a held-out endpoint also takes one attachment edge), no duplicate,
        // and its community keeps at least one exogenous member.
        const int dst_base =
            dst == u ? 1 : b.indegree[static_cast<std::size_t>(dst)];
        if (dst_base >= params.max_indegree) continue;
        if (dst != u && b.has(src, dst)) continue;
        if (dst != u && g.exogenous[static_cast<std::size_t>(dst)] &&
            exo_count[static_cast<std::size_t>(
                g.community[static_cast<std::size_t>(dst)])] < 2) {
          continue;
        }

        if (u >= 0) {
          g.community[static_cast<std::size_t>(u)] = host;
          auto mates = g.members_of(host);
          mates.erase(std::remove(mates.begin(), mates.end(), u),
                      mates.end());
          b.add(mates[rng.index(mates.size())], u);
          pending.pop_back();
        }
        if (dst != u && g.exogenous[static_cast<std::size_t>(dst)]) {
          g.exogenous[static_cast<std::size_t>(dst)] = 0;
          --exo_count[static_cast<std::size_t>(
              g.community[static_cast<std::size_t>(dst)])];
        }
        b.add(src, dst);
        placed = true;
      }
      if (!placed) {
        throw InfeasibleParams(
            "could not realize cross-community link " + std::to_string(link) +
            " within " + std::to_string(kMaxAttempts) + " attempts");
      }
    }
  }

  g.edges = std::move(b.edges);
  return g;
}

// ----------------------------------------------------------------------------
// Validation
// ----------------------------------------------------------------------------

enum class ViolationKind {
  BadEndpoint,
  DuplicateEdge,
  IndegreeExceeded,
  ExogenousFlagMismatch,
  NoExogenousInCommunity,
  CommunityDisconnected,
  UnexpectedCrossCommunityEdge,
  CrossCommunityLinkCountMismatch,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace detail

// Structural audit. Returns the empty list exactly when the graph satisfies
// every invariant under the given parameters.
inline std::vector<Violation> validate_graph(const DependencyGraph& g,
                                             const GenerationParams& params) {
  std::vector<Violation> out;
  auto flag = [&out](ViolationKind kind, std::string detail) {
    out.push_back({kind, std::move(detail)});
  };

  if (g.d != params.d ||
      static_cast<int>(g.community.size()) != g.d ||
      static_cast<int>(g.exogenous.size()) != g.d) {
    flag(ViolationKind::BadEndpoint, "graph shape does not match d");
    return out;
  }
  for (int v = 0; v < g.d; ++v) {
    const int c = g.community[static_cast<std::size_t>(v)];
    if (c < 0 || c >= g.num_communities) {
      flag(ViolationKind::BadEndpoint,
           "variable " + std::to_string(v) + " has no community");
    }
  }

  std::set<std::pair<int, int>> seen;
  std::vector<int> indeg(static_cast<std::size_t>(g.d), 0);
  int cross = 0;
  for (const Edge& e : g.edges) {
    if (e.src < 0 || e.src >= g.d || e.dst < 0 || e.dst >= g.d) {
      flag(ViolationKind::BadEndpoint,
           "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst));
      continue;
    }
    if (!seen.insert({e.src, e.dst}).second) {
      flag(ViolationKind::DuplicateEdge,
           "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst));
    }
    ++indeg[static_cast<std::size_t>(e.dst)];
    if (g.community[static_cast<std::size_t>(e.src)] !=
        g.community[static_cast<std::size_t>(e.dst)]) {
      ++cross;
      if (!params.link_communities) {
        flag(ViolationKind::UnexpectedCrossCommunityEdge,
             "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst));
      }
    }
  }

  for (int v = 0; v < g.d; ++v) {
    if (indeg[static_cast<std::size_t>(v)] > params.max_indegree) {
      flag(ViolationKind::IndegreeExceeded,
           "variable " + std::to_string(v) + " has indegree " +
               std::to_string(indeg[static_cast<std::size_t>(v)]));
    }
    const bool is_exo = indeg[static_cast<std::size_t>(v)] == 0;
    if (is_exo != (g.exogenous[static_cast<std::size_t>(v)] != 0)) {
      flag(ViolationKind::ExogenousFlagMismatch,
           "variable " + std::to_string(v));
    }
  }

  if (params.link_communities && cross != params.nb_links) {
    flag(ViolationKind::CrossCommunityLinkCountMismatch,
         "expected " + std::to_string(params.nb_links) + " got " +
             std::to_string(cross));
  }

  for (int c = 0; c < g.num_communities; ++c) {
    const auto members = g.members_of(c);
    if (members.empty()) {
      flag(ViolationKind::NoExogenousInCommunity,
           "community " + std::to_string(c) + " is empty");
      continue;
    }
    bool any_exo = false;
    for (int v : members) {
      any_exo = any_exo || indeg[static_cast<std::size_t>(v)] == 0;
    }
    if (!any_exo) {
      flag(ViolationKind::NoExogenousInCommunity,
           "community " + std::to_string(c));
    }

    detail::UnionFind uf(g.d);
    for (const Edge& e : g.edges) {
      if (e.src == e.dst) continue;
      if (g.community[static_cast<std::size_t>(e.src)] == c &&
          g.community[static_cast<std::size_t>(e.dst)] == c) {
        uf.unite(e.src, e.dst);
      }
    }
    for (std::size_t i = 1; i < members.size(); ++i) {
      if (uf.find(members[i]) != uf.find(members[0])) {
        flag(ViolationKind::CommunityDisconnected,
             "community " + std::to_string(c));
        break;
      }
    }
  }

  return out;
}

}  // namespace tsforge
