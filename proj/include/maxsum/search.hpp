#ifndef MAXSUM_SEARCH_HPP
#define MAXSUM_SEARCH_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "maxsum/elimination.hpp"
#include "maxsum/lp.hpp"
#include "maxsum/ordering.hpp"

namespace maxsum {

// Static mini-bucket heuristic built from lambda messages. For each variable
// v, out(v) holds the messages whose origin bucket lies at or below v in the
// pseudo-tree and whose destination lies strictly above it; their scopes are
// evaluable at any path assignment down to v's parent.
class HeuristicTable {
 public:
  HeuristicTable(const PseudoTree& pt, MessageSet msgs)
      : pt_(pt), msgs_(std::move(msgs)), out_(pt.parent.size()) {
    for (std::size_t i = 0; i < msgs_.messages.size(); ++i) {
      const Message& msg = msgs_.messages[i];
      for (VarId v = msg.origin; v >= 0 && v != msg.dest;
           v = pt_.parent[std::size_t(v)])
        out_[std::size_t(v)].push_back(int(i));
    }
  }

  const PseudoTree& tree() const { return pt_; }
  const MessageSet& messages() const { return msgs_; }
  double constant() const { return msgs_.model_constant; }

  // Upper bound on the subproblem rooted at v (v not yet assigned); x must
  // assign v's ancestors.
  double at(VarId v, const Assignment& x) const {
    double s = 0;
    for (int i : out_[std::size_t(v)])
      s += msgs_.messages[std::size_t(i)].payload.value_at(x);
    return s;
  }

  // Upper bound on the best completion below v given x, which must assign v
  // and all its pseudo-tree ancestors.
  double below(VarId v, const Assignment& x) const {
    for (VarId u = v; u >= 0; u = pt_.parent[std::size_t(u)])
      if (std::size_t(u) >= x.size() || !x.assigned(u))
        throw usage_error("heuristic: variable " + std::to_string(u) +
                          " on the path is unassigned");
    double s = 0;
    for (VarId c : pt_.children[std::size_t(v)]) s += at(c, x);
    return s;
  }

  // Bound at the virtual root: constants plus all messages that cross above
  // the component roots. Equals the bound of the generating elimination run.
  double root_bound() const {
    Assignment empty(pt_.parent.size());
    double s = msgs_.model_constant;
    for (VarId r : pt_.roots) s += at(r, empty);
    return clamp_log(s);
  }

 private:
  PseudoTree pt_;
  MessageSet msgs_;
  std::vector<std::vector<int>> out_;
};

struct SearchStats {
  std::uint64_t nodes = 0;  // OR and AND expansions
  double elapsed = 0;
  double best = -std::numeric_limits<double>::infinity();
  BoundTrace trace;  // incumbent improvements: (elapsed, value)
  bool timed_out = false;
};

struct SearchResult {
  double value = -std::numeric_limits<double>::infinity();
  Assignment argmax;
  SearchStats stats;
};

struct AobbOptions {
  bool prune = true;
  std::uint64_t poll_interval = 1024;  // deadline poll, in node expansions
};

namespace detail {

constexpr double kPruneSlack = 1e-12;  // slack toward NOT pruning

struct AobbContext {
  const GraphicalModel& model;
  const PseudoTree& pt;
  const HeuristicTable& h;
  std::vector<std::vector<int>> assoc{};  // factor indices by deepest variable
  Assignment x{};
  std::uint64_t nodes = 0;
  bool prune = true;
  Stopwatch clock{};
  double time_limit = std::numeric_limits<double>::infinity();
  std::uint64_t poll_interval = 1024;
  std::uint64_t ticks = 0;
  bool timed_out = false;

  bool tick() {
    if (timed_out) return false;
    if (++ticks % poll_interval == 0 && clock.elapsed() >= time_limit)
      timed_out = true;
    return !timed_out;
  }
};

struct OrOutcome {
  double value = -std::numeric_limits<double>::infinity();
  bool exact = false;  // value is the true subtree maximum
  std::vector<std::pair<VarId, int>> sol;
};

// Depth-first OR expansion of variable j under the current path assignment.
// Contract: value <= true max; exact whenever true max >= thresh - slack
// (and no timeout). Pruned subtrees are proven unable to reach thresh.
inline OrOutcome solve_or(AobbContext& ctx, VarId j, double thresh,
                          const std::function<void(double)>* on_improve = nullptr) {
  ++ctx.nodes;
  const int card = ctx.model.card(j);
  const auto& children = ctx.pt.children[std::size_t(j)];

  struct Cand {
    int val = 0;
    double cost = 0;  // factors resolved exactly at j, under the path
    double bound = 0;
    std::vector<double> child_ub;
  };
  std::vector<Cand> cands;
  cands.reserve(std::size_t(card));
  for (int val = 0; val < card; ++val) {
    ctx.x.set(j, val);
    Cand c;
    c.val = val;
    for (int fi : ctx.assoc[std::size_t(j)])
      c.cost += ctx.model.factors()[std::size_t(fi)].value_at(ctx.x);
    c.child_ub.reserve(children.size());
    double hsum = 0;
    for (VarId ch : children) {
      double u = ctx.h.at(ch, ctx.x);
      c.child_ub.push_back(u);
      hsum += u;
    }
    c.bound = c.cost + hsum;
    cands.push_back(std::move(c));
  }
  ctx.x.clear(j);
  // dynamic value ordering: decreasing g+h, ties by lowest value index
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.bound > b.bound; });

  OrOutcome out;
  for (const Cand& c : cands) {
    if (!ctx.tick()) break;
    double gate = std::max(out.value, thresh);
    if (ctx.prune && c.bound < gate - kPruneSlack) break;  // sorted descending

    ++ctx.nodes;
    ctx.x.set(j, c.val);

    double running = c.cost;
    double rest_ub = 0;
    for (double u : c.child_ub) rest_ub += u;

    bool complete = true;
    std::vector<std::pair<VarId, int>> sol{{j, c.val}};
    for (std::size_t i = 0; i < children.size(); ++i) {
      rest_ub -= c.child_ub[i];
      double child_thresh = ctx.prune
                                ? gate - running - rest_ub
                                : -std::numeric_limits<double>::infinity();
      OrOutcome sub = solve_or(ctx, children[i], child_thresh);
      if (ctx.timed_out || !sub.exact) {
        complete = false;  // proven unable to reach the gate, or out of time
        break;
      }
      running += sub.value;
      sol.insert(sol.end(), sub.sol.begin(), sub.sol.end());
      if (ctx.prune && running + rest_ub < gate - kPruneSlack) {
        complete = false;
        break;
      }
    }
    ctx.x.clear(j);

    if (complete && running > out.value) {
      out.value = running;
      out.sol = std::move(sol);
      if (on_improve) (*on_improve)(out.value);
    }
  }
  out.exact = !ctx.timed_out && out.value >= thresh - kPruneSlack;
  return out;
}

}  // namespace detail

// Depth-first AND/OR Branch-and-Bound. On natural termination returns the
// exact optimum; on time-out the best solution found so far. Only the stop
// rule's time limit applies here.
inline SearchResult aobb(const GraphicalModel& m, const PseudoTree& pt,
                         const HeuristicTable& h, const StopRule& stop,
                         const AobbOptions& opt = {}) {
  detail::AobbContext ctx{.model = m, .pt = pt, .h = h};
  ctx.x = Assignment(m.num_vars());
  ctx.prune = opt.prune;
  ctx.time_limit = stop.time_limit;
  ctx.poll_interval = opt.poll_interval == 0 ? 1 : opt.poll_interval;

  std::vector<int> pos = pt.order.positions();
  double constant = 0;
  ctx.assoc.assign(m.num_vars(), {});
  for (std::size_t fi = 0; fi < m.factors().size(); ++fi) {
    const Factor& f = m.factors()[fi];
    if (f.scalar()) {
      constant += f[0];
      continue;
    }
    VarId deepest = *std::min_element(
        f.scope().begin(), f.scope().end(),
        [&](VarId a, VarId b) { return pos[std::size_t(a)] < pos[std::size_t(b)]; });
    ctx.assoc[std::size_t(deepest)].push_back(int(fi));
  }

  SearchResult res;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> root_best(pt.roots.size(), neg_inf);
  std::vector<std::vector<std::pair<VarId, int>>> root_sol(pt.roots.size());
  double incumbent = neg_inf;

  auto record_incumbent = [&] {
    double sum = constant;
    for (double rb : root_best) {
      if (rb == neg_inf) return;
      sum += rb;
    }
    if (sum > incumbent) {
      incumbent = sum;
      detail::push_trace(res.stats.trace, ctx.clock.elapsed(), sum);
    }
  };

  for (std::size_t ri = 0; ri < pt.roots.size() && !ctx.timed_out; ++ri) {
    std::function<void(double)> cb = [&](double v) {
      root_best[ri] = v;
      record_incumbent();
    };
    detail::OrOutcome outc = detail::solve_or(ctx, pt.roots[ri], neg_inf, &cb);
    if (outc.value > root_best[ri]) root_best[ri] = outc.value;
    root_sol[ri] = std::move(outc.sol);
  }
  if (pt.roots.empty()) {
    incumbent = constant;
    detail::push_trace(res.stats.trace, ctx.clock.elapsed(), incumbent);
  }
  record_incumbent();

  res.value = incumbent;
  res.argmax = Assignment(m.num_vars());
  for (const auto& sol : root_sol)
    for (auto [v, val] : sol) res.argmax.set(v, val);

  res.stats.nodes = ctx.nodes;
  res.stats.elapsed = ctx.clock.elapsed();
  res.stats.best = res.value;
  res.stats.timed_out = ctx.timed_out;
  return res;
}

enum class HeuristicScheme { kMbe, kMbeMm, kFglpMbe, kJglp };

// The heuristic table plus the factor system it bounds. Searches must run
// over `model`: for the LP schemes the factors are reparameterized (their
// total equals the input model at every full assignment).
struct BuiltHeuristic {
  GraphicalModel model;
  PseudoTree pt;
  HeuristicTable table;
  double bound = 0;  // root bound of the generating scheme
};

inline BuiltHeuristic build_heuristic(const GraphicalModel& m,
                                      const EliminationOrder& o, int z,
                                      HeuristicScheme scheme,
                                      const StopRule& lp_stop = {.time_limit = 30.0},
                                      std::uint64_t budget = kDefaultMemoryBudget) {
  PseudoTree pt = build_pseudo_tree(m, o);
  switch (scheme) {
    case HeuristicScheme::kMbe: {
      BoundResult r = mini_bucket_elim(m, o, z, budget);
      HeuristicTable table(pt, std::move(r.messages));
      return BuiltHeuristic{m, std::move(pt), std::move(table), r.bound};
    }
    case HeuristicScheme::kMbeMm: {
      BoundResult r = mbe_mm(m, o, z, budget);
      HeuristicTable table(pt, std::move(r.messages));
      return BuiltHeuristic{m, std::move(pt), std::move(table), r.bound};
    }
    case HeuristicScheme::kFglpMbe: {
      FglpResult pre = fglp(m, lp_stop);
      BoundResult r = mini_bucket_elim(pre.model, o, z, budget);
      HeuristicTable table(pt, std::move(r.messages));
      return BuiltHeuristic{std::move(pre.model), std::move(pt),
                            std::move(table), r.bound};
    }
    case HeuristicScheme::kJglp: {
      JoinGraph jg = join_graph_structuring(m, o, z, budget);
      JglpResult tightened = jglp(jg, lp_stop);
      BoundResult r = mbe_over_join_graph(tightened.graph);

      GraphicalModel sm(m.cards());
      if (tightened.graph.constant != 0.0)
        sm.add_factor(Factor(tightened.graph.constant));
      for (const auto& c : tightened.graph.clusters) sm.add_factor(c.fn);

      HeuristicTable table(pt, std::move(r.messages));
      return BuiltHeuristic{std::move(sm), std::move(pt), std::move(table),
                            r.bound};
    }
  }
  throw usage_error("build_heuristic: unknown scheme");
}

}  // namespace maxsum

#endif  // MAXSUM_SEARCH_HPP
