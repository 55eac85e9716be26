#ifndef MAXSUM_ELIMINATION_HPP
#define MAXSUM_ELIMINATION_HPP

#include <climits>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "maxsum/model.hpp"
#include "maxsum/ordering.hpp"

namespace maxsum {

// Table-byte budget for elimination runs (predicted, checked up front).
constexpr std::uint64_t kDefaultMemoryBudget = 3ull << 30;  // 3 GiB

struct Bucket {
  VarId var = -1;
  std::vector<Factor> residents;  // originals placed here + received messages
};

struct MiniBucket {
  std::vector<int> members;   // indices into the bucket's residents
  std::vector<VarId> scope;   // union scope, <= z+1 variables
};

// A lambda message produced by eliminating the origin bucket's variable from
// one mini-bucket. dest = -1 routes a scalar payload to the constant pool.
struct Message {
  Factor payload;
  VarId origin = -1;
  int mini_index = 0;
  VarId dest = -1;
};

struct MessageSet {
  std::vector<Message> messages;
  double model_constant = 0;  // empty-scope input factors

  double bound() const {
    double b = model_constant;
    for (const Message& m : messages)
      if (m.dest < 0) b += m.payload[0];
    return clamp_log(b);
  }
};

namespace detail {

inline std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b
             ? std::numeric_limits<std::uint64_t>::max()
             : a + b;
}

inline std::vector<VarId> scope_union(const std::vector<VarId>& a,
                                      const std::vector<VarId>& b) {
  std::vector<VarId> u;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(u));
  return u;
}

inline std::vector<VarId> scope_intersect(const std::vector<VarId>& a,
                                          const std::vector<VarId>& b) {
  std::vector<VarId> s;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(s));
  return s;
}

struct ScopePartition {
  std::vector<std::vector<int>> groups;      // item indices per mini-bucket
  std::vector<std::vector<VarId>> unions;    // running union scope per group
};

// Deterministic greedy partition: items sorted by (scope size descending,
// then lexicographic scope; stable), each placed into the first group whose
// union scope stays within z+1 variables.
inline ScopePartition partition_scopes(
    const std::vector<std::vector<VarId>>& scopes, int z) {
  const std::size_t max_vars =
      z >= INT_MAX ? std::size_t(-1) : std::size_t(z) + 1;

  std::vector<int> idx(scopes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& sa = scopes[std::size_t(a)];
    const auto& sb = scopes[std::size_t(b)];
    if (sa.size() != sb.size()) return sa.size() > sb.size();
    return sa < sb;
  });

  ScopePartition part;
  for (int it : idx) {
    const auto& s = scopes[std::size_t(it)];
    bool placed = false;
    for (std::size_t g = 0; g < part.groups.size(); ++g) {
      auto u = scope_union(part.unions[g], s);
      if (u.size() <= max_vars) {
        part.unions[g] = std::move(u);
        part.groups[g].push_back(it);
        placed = true;
        break;
      }
    }
    if (!placed) {
      if (s.size() > max_vars)
        throw infeasible_z_error(
            "factor with " + std::to_string(s.size()) +
            " variables cannot be placed in a mini-bucket of z = " +
            std::to_string(z));
      part.groups.push_back({it});
      part.unions.push_back(s);
    }
  }
  return part;
}

}  // namespace detail

// Deterministic z-partition of a bucket's residents.
inline std::vector<MiniBucket> partition_minibuckets(const Bucket& b, int z) {
  std::vector<std::vector<VarId>> scopes;
  scopes.reserve(b.residents.size());
  for (const Factor& f : b.residents) scopes.push_back(f.scope());
  auto part = detail::partition_scopes(scopes, z);
  std::vector<MiniBucket> out(part.groups.size());
  for (std::size_t g = 0; g < part.groups.size(); ++g) {
    out[g].members = std::move(part.groups[g]);
    out[g].scope = std::move(part.unions[g]);
  }
  return out;
}

namespace detail {

// Predicted table sizes of an elimination run, simulated on scopes alone.
struct MemoryPlan {
  std::uint64_t entries = 0;
  std::uint64_t worst_entries = 0;
  VarId worst_var = -1;
};

inline MemoryPlan plan_elimination(const GraphicalModel& m,
                                   const EliminationOrder& o, int z) {
  check_permutation(m, o);
  const std::size_t n = m.num_vars();
  std::vector<int> pos = o.positions();
  std::vector<std::vector<std::vector<VarId>>> items(n);
  for (const Factor& f : m.factors()) {
    if (f.scalar()) continue;
    VarId dest = *std::min_element(
        f.scope().begin(), f.scope().end(),
        [&](VarId a, VarId b) { return pos[std::size_t(a)] < pos[std::size_t(b)]; });
    items[std::size_t(pos[std::size_t(dest)])].push_back(f.scope());
  }

  MemoryPlan plan;
  for (std::size_t p = 0; p < n; ++p) {
    if (items[p].empty()) continue;
    VarId v = o.order[p];
    auto part = partition_scopes(items[p], z);
    for (const auto& u : part.unions) {
      std::uint64_t e = 1;
      for (VarId x : u) e = mul_sat(e, std::uint64_t(m.card(x)));
      plan.entries = add_sat(plan.entries, e);
      if (e > plan.worst_entries) {
        plan.worst_entries = e;
        plan.worst_var = v;
      }
      // message scope routed onward
      std::vector<VarId> s;
      for (VarId x : u)
        if (x != v) s.push_back(x);
      if (s.empty()) continue;
      VarId dest = *std::min_element(s.begin(), s.end(), [&](VarId a, VarId b) {
        return pos[std::size_t(a)] < pos[std::size_t(b)];
      });
      items[std::size_t(pos[std::size_t(dest)])].push_back(std::move(s));
    }
  }
  return plan;
}

inline void check_memory(const GraphicalModel& m, const EliminationOrder& o,
                         int z, std::uint64_t budget) {
  MemoryPlan plan = plan_elimination(m, o, z);
  std::uint64_t bytes = mul_sat(plan.entries, sizeof(double));
  if (bytes > budget)
    throw capacity_error(
        "predicted " + std::to_string(bytes) + " table bytes exceed budget " +
        std::to_string(budget) + "; largest bucket at variable " +
        std::to_string(plan.worst_var) + " (" +
        std::to_string(plan.worst_entries) + " entries)");
}

}  // namespace detail

// One max-marginal-matching update inside a bucket (MBE-MM): the combined
// mini-bucket functions before and after the averaged shift.
struct BucketMatchEvent {
  VarId var;
  const std::vector<Factor>& before;
  const std::vector<Factor>& after;
};
using MatchObserver = std::function<void(const BucketMatchEvent&)>;

namespace detail {

struct ForwardResult {
  MessageSet messages;
  double constant = 0;             // model constant + scalar messages
  std::vector<Factor> bucket_fns;  // combined per position (BE only)
};

inline ForwardResult forward_eliminate(const GraphicalModel& m,
                                       const EliminationOrder& o, int z,
                                       bool matching, bool keep_bucket_fns,
                                       const MatchObserver& observer) {
  check_permutation(m, o);
  const std::size_t n = m.num_vars();
  std::vector<int> pos = o.positions();

  std::vector<Bucket> buckets(n);
  for (std::size_t p = 0; p < n; ++p) buckets[p].var = o.order[p];

  ForwardResult r;
  for (const Factor& f : m.factors()) {
    if (f.scalar()) {
      r.messages.model_constant += f[0];
      continue;
    }
    VarId dest = *std::min_element(
        f.scope().begin(), f.scope().end(),
        [&](VarId a, VarId b) { return pos[std::size_t(a)] < pos[std::size_t(b)]; });
    buckets[std::size_t(pos[std::size_t(dest)])].residents.push_back(f);
  }
  r.constant = r.messages.model_constant;
  if (keep_bucket_fns) r.bucket_fns.assign(n, Factor(0.0));

  for (std::size_t p = 0; p < n; ++p) {
    Bucket& b = buckets[p];
    if (b.residents.empty()) continue;

    auto minis = partition_minibuckets(b, z);
    std::vector<Factor> fns;
    fns.reserve(minis.size());
    for (const MiniBucket& q : minis) {
      Factor fn = b.residents[std::size_t(q.members[0])];
      for (std::size_t i = 1; i < q.members.size(); ++i)
        fn = combine(fn, b.residents[std::size_t(q.members[i])]);
      fns.push_back(std::move(fn));
    }

    if (matching && fns.size() >= 2) {
      // S_i = intersection of all mini-bucket scopes (contains the variable)
      std::vector<VarId> s = minis[0].scope;
      for (std::size_t k = 1; k < minis.size(); ++k)
        s = detail::scope_intersect(s, minis[k].scope);

      std::vector<Factor> gammas;
      gammas.reserve(fns.size());
      for (const Factor& fn : fns) gammas.push_back(max_marginal(fn, s));

      std::vector<double> meanv(gammas[0].size());
      for (std::size_t i = 0; i < meanv.size(); ++i) {
        double sum = 0;
        for (const Factor& g : gammas) sum += g[i];
        meanv[i] = clamp_log(sum / double(fns.size()));
      }

      std::vector<Factor> before;
      if (observer) before = fns;
      for (std::size_t k = 0; k < fns.size(); ++k) {
        std::vector<double> dv(meanv.size());
        for (std::size_t i = 0; i < dv.size(); ++i)
          dv[i] = meanv[i] - gammas[k][i];
        Factor delta(gammas[k].scope(), gammas[k].cards(), std::move(dv));
        fns[k] = shift(fns[k], delta);
      }
      if (observer) observer(BucketMatchEvent{b.var, before, fns});
    }

    if (keep_bucket_fns) r.bucket_fns[p] = fns[0];

    for (std::size_t k = 0; k < fns.size(); ++k) {
      Factor lam = max_eliminate(fns[k], b.var);
      Message msg;
      msg.origin = b.var;
      msg.mini_index = int(k);
      if (lam.scalar()) {
        msg.dest = -1;
        r.constant += lam[0];
      } else {
        const auto& s = lam.scope();
        VarId dest = *std::min_element(s.begin(), s.end(), [&](VarId a, VarId b2) {
          return pos[std::size_t(a)] < pos[std::size_t(b2)];
        });
        msg.dest = dest;
        buckets[std::size_t(pos[std::size_t(dest)])].residents.push_back(lam);
      }
      msg.payload = std::move(lam);
      r.messages.messages.push_back(std::move(msg));
    }
  }
  return r;
}

}  // namespace detail

struct EliminationResult {
  double value = 0;
  Assignment argmax;
  MessageSet messages;
};

// Exact bucket elimination with the standard backward argmax pass
// (reverse elimination order, lowest value index on ties).
inline EliminationResult bucket_elimination(
    const GraphicalModel& m, const EliminationOrder& o,
    std::uint64_t budget = kDefaultMemoryBudget) {
  detail::check_memory(m, o, INT_MAX, budget);
  auto fwd = detail::forward_eliminate(m, o, INT_MAX, false, true, {});

  const std::size_t n = m.num_vars();
  Assignment x(n);
  for (int p = int(n) - 1; p >= 0; --p) {
    VarId v = o.order[std::size_t(p)];
    const Factor& g = fwd.bucket_fns[std::size_t(p)];
    if (!g.contains(v)) {
      x.set(v, 0);  // bucket had no residents; any value is optimal
      continue;
    }
    int best_val = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int val = 0; val < m.card(v); ++val) {
      x.set(v, val);
      double cand = g.value_at(x);
      if (cand > best) {
        best = cand;
        best_val = val;
      }
    }
    x.set(v, best_val);
  }

  EliminationResult r;
  r.value = fwd.constant;
  r.argmax = std::move(x);
  r.messages = std::move(fwd.messages);
  return r;
}

struct BoundResult {
  double bound = 0;
  MessageSet messages;
};

// Mini-bucket elimination MBE(z): upper bound, exact once z reaches the
// induced width of the order.
inline BoundResult mini_bucket_elim(const GraphicalModel& m,
                                    const EliminationOrder& o, int z,
                                    std::uint64_t budget = kDefaultMemoryBudget) {
  if (z < 1) throw usage_error("mini_bucket_elim: z must be >= 1");
  detail::check_memory(m, o, z, budget);
  auto fwd = detail::forward_eliminate(m, o, z, false, false, {});
  return BoundResult{clamp_log(fwd.constant), std::move(fwd.messages)};
}

// MBE with max-marginal matching: one simultaneous averaged update over all
// mini-buckets of each bucket before elimination (buckets with a single
// mini-bucket are untouched).
inline BoundResult mbe_mm(const GraphicalModel& m, const EliminationOrder& o,
                          int z, std::uint64_t budget = kDefaultMemoryBudget,
                          const MatchObserver& observer = {}) {
  if (z < 1) throw usage_error("mbe_mm: z must be >= 1");
  detail::check_memory(m, o, z, budget);
  auto fwd = detail::forward_eliminate(m, o, z, true, false, observer);
  return BoundResult{clamp_log(fwd.constant), std::move(fwd.messages)};
}

// Mini-bucket join graph: one cluster per mini-bucket holding the sum of the
// original functions assigned to it, parent arcs following the routed scope
// stand-ins, and chain arcs linking the mini-buckets of a bucket.
struct JoinGraphCluster {
  std::vector<VarId> scope;
  Factor fn;  // materialized over the full cluster scope
  VarId bucket_var = -1;
  int mini_index = 0;
};

struct JoinGraphEdge {
  int a = -1;
  int b = -1;
  std::vector<VarId> separator;  // scope intersection
  bool parent_arc = true;        // false: intra-bucket chain arc
};

struct JoinGraph {
  std::vector<JoinGraphCluster> clusters;
  std::vector<JoinGraphEdge> edges;
  std::vector<int> parent_of;  // receiving cluster per cluster, -1 = pool
  double constant = 0;         // empty-scope input factors
  EliminationOrder order;

  std::vector<Factor> cluster_functions() const {
    std::vector<Factor> fs;
    fs.reserve(clusters.size());
    for (const auto& c : clusters) fs.push_back(c.fn);
    return fs;
  }
};

inline JoinGraph join_graph_structuring(
    const GraphicalModel& m, const EliminationOrder& o, int z,
    std::uint64_t budget = kDefaultMemoryBudget) {
  if (z < 1) throw usage_error("join_graph_structuring: z must be >= 1");
  detail::check_permutation(m, o);
  detail::check_memory(m, o, z, budget);

  const std::size_t n = m.num_vars();
  std::vector<int> pos = o.positions();

  struct Item {
    std::vector<VarId> scope;
    int factor = -1;        // original factor index, or
    int from_cluster = -1;  // cluster whose stand-in this is
  };
  std::vector<std::vector<Item>> items(n);

  JoinGraph jg;
  jg.order = o;
  for (std::size_t fi = 0; fi < m.factors().size(); ++fi) {
    const Factor& f = m.factors()[fi];
    if (f.scalar()) {
      jg.constant += f[0];
      continue;
    }
    VarId dest = *std::min_element(
        f.scope().begin(), f.scope().end(),
        [&](VarId a, VarId b) { return pos[std::size_t(a)] < pos[std::size_t(b)]; });
    items[std::size_t(pos[std::size_t(dest)])].push_back(
        Item{f.scope(), int(fi), -1});
  }

  for (std::size_t p = 0; p < n; ++p) {
    if (items[p].empty()) continue;
    VarId v = o.order[p];

    std::vector<std::vector<VarId>> scopes;
    scopes.reserve(items[p].size());
    for (const Item& it : items[p]) scopes.push_back(it.scope);
    auto part = detail::partition_scopes(scopes, z);

    int first_cluster = int(jg.clusters.size());
    for (std::size_t g = 0; g < part.groups.size(); ++g) {
      int cid = int(jg.clusters.size());
      const auto& scope = part.unions[g];

      std::vector<int> cards(scope.size());
      std::size_t sz = 1;
      for (std::size_t q = 0; q < scope.size(); ++q) {
        cards[q] = m.card(scope[q]);
        sz *= std::size_t(cards[q]);
      }
      Factor fn(scope, cards, std::vector<double>(sz, 0.0));
      for (int mi : part.groups[g]) {
        const Item& it = items[p][std::size_t(mi)];
        if (it.factor >= 0) fn = combine(fn, m.factors()[std::size_t(it.factor)]);
        if (it.from_cluster >= 0) {
          jg.parent_of[std::size_t(it.from_cluster)] = cid;
          jg.edges.push_back(JoinGraphEdge{it.from_cluster, cid, it.scope, true});
        }
      }

      jg.clusters.push_back(JoinGraphCluster{scope, std::move(fn), v, int(g)});
      jg.parent_of.push_back(-1);

      std::vector<VarId> standin;
      for (VarId x : scope)
        if (x != v) standin.push_back(x);
      if (!standin.empty()) {
        VarId dest = *std::min_element(
            standin.begin(), standin.end(), [&](VarId a, VarId b) {
              return pos[std::size_t(a)] < pos[std::size_t(b)];
            });
        items[std::size_t(pos[std::size_t(dest)])].push_back(
            Item{std::move(standin), -1, cid});
      }
    }

    for (std::size_t g = 1; g < part.groups.size(); ++g) {
      int a = first_cluster + int(g) - 1;
      int b = first_cluster + int(g);
      jg.edges.push_back(JoinGraphEdge{
          a, b,
          detail::scope_intersect(jg.clusters[std::size_t(a)].scope,
                                  jg.clusters[std::size_t(b)].scope),
          false});
    }
  }

  // fixed sweep order: origin bucket position, mini index, parents first
  std::vector<int> cpos(jg.clusters.size());
  for (std::size_t c = 0; c < jg.clusters.size(); ++c)
    cpos[c] = pos[std::size_t(jg.clusters[c].bucket_var)];
  std::stable_sort(jg.edges.begin(), jg.edges.end(),
                   [&](const JoinGraphEdge& x, const JoinGraphEdge& y) {
                     auto key = [&](const JoinGraphEdge& e) {
                       return std::tuple(cpos[std::size_t(e.a)],
                                         jg.clusters[std::size_t(e.a)].mini_index,
                                         e.parent_arc ? 0 : 1,
                                         cpos[std::size_t(e.b)],
                                         jg.clusters[std::size_t(e.b)].mini_index);
                     };
                     return key(x) < key(y);
                   });
  return jg;
}

// The mini-bucket dynamic program restricted to the join graph's parent arcs
// (its spanning tree): combines each cluster with its received messages,
// eliminates the bucket variable, and forwards along the parent arc. With
// freshly structured cluster functions this reproduces plain MBE; after JGLP
// convergence it leaves the bound unchanged.
inline BoundResult mbe_over_join_graph(const JoinGraph& jg) {
  std::vector<std::vector<Factor>> inbox(jg.clusters.size());
  MessageSet ms;
  ms.model_constant = jg.constant;
  double constant = jg.constant;

  for (std::size_t c = 0; c < jg.clusters.size(); ++c) {
    Factor fn = jg.clusters[c].fn;
    for (const Factor& in : inbox[c]) fn = combine(fn, in);
    Factor lam = max_eliminate(fn, jg.clusters[c].bucket_var);

    Message msg;
    msg.origin = jg.clusters[c].bucket_var;
    msg.mini_index = jg.clusters[c].mini_index;
    int par = jg.parent_of[c];
    if (par >= 0) {
      msg.dest = jg.clusters[std::size_t(par)].bucket_var;
      inbox[std::size_t(par)].push_back(lam);
    } else {
      msg.dest = -1;
      constant += lam[0];
    }
    msg.payload = std::move(lam);
    ms.messages.push_back(std::move(msg));
  }
  return BoundResult{clamp_log(constant), std::move(ms)};
}

}  // namespace maxsum

#endif  // MAXSUM_ELIMINATION_HPP
