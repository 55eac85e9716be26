#ifndef MAXSUM_ORDERING_HPP
#define MAXSUM_ORDERING_HPP

#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "maxsum/model.hpp"

namespace maxsum {

// Undirected variable adjacency; edge (i,j) iff some factor scope holds both.
using PrimalGraph = std::vector<std::set<VarId>>;

inline PrimalGraph primal_graph(const GraphicalModel& m) {
  PrimalGraph adj(m.num_vars());
  for (const Factor& f : m.factors()) {
    const auto& s = f.scope();
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        adj[std::size_t(s[i])].insert(s[j]);
        adj[std::size_t(s[j])].insert(s[i]);
      }
  }
  return adj;
}

// Position 0 is eliminated first.
struct EliminationOrder {
  std::vector<VarId> order;
  int width = 0;

  // position[v] = step at which v is eliminated
  std::vector<int> positions() const {
    std::vector<int> pos(order.size());
    for (std::size_t p = 0; p < order.size(); ++p)
      pos[std::size_t(order[p])] = int(p);
    return pos;
  }
};

namespace detail {

inline void check_permutation(const GraphicalModel& m,
                              const EliminationOrder& o) {
  if (o.order.size() != m.num_vars())
    throw usage_error("order: wrong number of variables");
  std::vector<char> seen(m.num_vars(), 0);
  for (VarId v : o.order) {
    if (v < 0 || std::size_t(v) >= m.num_vars() || seen[std::size_t(v)])
      throw usage_error("order: not a permutation of the model's variables");
    seen[std::size_t(v)] = 1;
  }
}

// Eliminate v from adj: clique its neighbors, then remove it.
inline void eliminate_vertex(PrimalGraph& adj, VarId v) {
  auto& nb = adj[std::size_t(v)];
  for (auto i = nb.begin(); i != nb.end(); ++i)
    for (auto j = std::next(i); j != nb.end(); ++j) {
      adj[std::size_t(*i)].insert(*j);
      adj[std::size_t(*j)].insert(*i);
    }
  for (VarId u : nb) adj[std::size_t(u)].erase(v);
  nb.clear();
}

}  // namespace detail

// Simulate elimination along o; returns the maximum neighbor count at
// elimination time.
inline int induced_width(const GraphicalModel& m, const EliminationOrder& o) {
  detail::check_permutation(m, o);
  PrimalGraph adj = primal_graph(m);
  int w = 0;
  for (VarId v : o.order) {
    w = std::max(w, int(adj[std::size_t(v)].size()));
    detail::eliminate_vertex(adj, v);
  }
  return w;
}

// Greedy min-fill: repeatedly eliminate the vertex adding the fewest fill
// edges, ties broken uniformly by the seeded RNG.
inline EliminationOrder min_fill_order(const GraphicalModel& m,
                                       std::uint64_t seed = 42) {
  const std::size_t n = m.num_vars();
  PrimalGraph adj = primal_graph(m);
  std::mt19937_64 rng(seed);
  std::vector<char> gone(n, 0);

  EliminationOrder out;
  out.order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    long best = -1;
    std::vector<VarId> ties;
    for (std::size_t v = 0; v < n; ++v) {
      if (gone[v]) continue;
      const auto& nb = adj[v];
      long fill = 0;
      for (auto i = nb.begin(); i != nb.end(); ++i)
        for (auto j = std::next(i); j != nb.end(); ++j)
          if (!adj[std::size_t(*i)].count(*j)) ++fill;
      if (best < 0 || fill < best) {
        best = fill;
        ties.assign(1, VarId(v));
      } else if (fill == best) {
        ties.push_back(VarId(v));
      }
    }
    VarId pick = ties.size() == 1
                     ? ties[0]
                     : ties[std::uniform_int_distribution<std::size_t>(
                           0, ties.size() - 1)(rng)];
    out.width = std::max(out.width, int(adj[std::size_t(pick)].size()));
    detail::eliminate_vertex(adj, pick);
    gone[std::size_t(pick)] = 1;
    out.order.push_back(pick);
  }
  return out;
}

// Restart wrapper: evaluates seeds seed..seed+restarts-1, keeps the best
// (width, seed) order.
inline EliminationOrder best_min_fill_order(const GraphicalModel& m,
                                            std::uint64_t seed = 42,
                                            int restarts = 1) {
  EliminationOrder best = min_fill_order(m, seed);
  for (int r = 1; r < restarts; ++r) {
    EliminationOrder cand = min_fill_order(m, seed + std::uint64_t(r));
    if (cand.width < best.width) best = std::move(cand);
  }
  return best;
}

// Rooted tree over variables; every factor scope lies on one root-to-leaf
// path. parent[v] = -1 for component roots (multiple components share a
// virtual super-root).
struct PseudoTree {
  std::vector<VarId> parent;
  std::vector<std::vector<VarId>> children;
  std::vector<VarId> roots;
  EliminationOrder order;

  bool is_ancestor(VarId anc, VarId v) const {
    for (VarId u = parent[std::size_t(v)]; u >= 0; u = parent[std::size_t(u)])
      if (u == anc) return true;
    return false;
  }
};

// parent(X) = earliest-eliminated vertex among X's induced-graph neighbors
// eliminated after X; the last vertex of each component becomes a root.
inline PseudoTree build_pseudo_tree(const GraphicalModel& m,
                                    const EliminationOrder& o) {
  detail::check_permutation(m, o);
  const std::size_t n = m.num_vars();
  PrimalGraph adj = primal_graph(m);
  std::vector<int> pos = o.positions();

  PseudoTree pt;
  pt.order = o;
  pt.parent.assign(n, -1);
  pt.children.assign(n, {});
  for (VarId v : o.order) {
    VarId parent = -1;
    for (VarId u : adj[std::size_t(v)])
      if (parent < 0 || pos[std::size_t(u)] < pos[std::size_t(parent)])
        parent = u;
    pt.parent[std::size_t(v)] = parent;  // all remaining neighbors are later
    detail::eliminate_vertex(adj, v);
  }
  for (std::size_t v = 0; v < n; ++v) {
    VarId p = pt.parent[v];
    if (p < 0)
      pt.roots.push_back(VarId(v));
    else
      pt.children[std::size_t(p)].push_back(VarId(v));
  }
  return pt;
}

// Order dump/load: whitespace-separated variable ids, position 0 first.
inline std::string format_order(const EliminationOrder& o) {
  std::ostringstream out;
  for (std::size_t p = 0; p < o.order.size(); ++p) {
    if (p) out << ' ';
    out << o.order[p];
  }
  return out.str();
}

inline EliminationOrder parse_order(std::istream& in,
                                    const GraphicalModel& m) {
  EliminationOrder o;
  long v;
  while (in >> v) o.order.push_back(VarId(v));
  detail::check_permutation(m, o);
  o.width = induced_width(m, o);
  return o;
}

inline EliminationOrder parse_order(const std::string& text,
                                    const GraphicalModel& m) {
  std::istringstream in(text);
  return parse_order(in, m);
}

}  // namespace maxsum

#endif  // MAXSUM_ORDERING_HPP
