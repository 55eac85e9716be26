#ifndef MAXSUM_LP_HPP
#define MAXSUM_LP_HPP

#include <chrono>
#include <climits>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "maxsum/elimination.hpp"
#include "maxsum/model.hpp"

namespace maxsum {

struct TracePoint {
  double elapsed = 0;  // seconds since solver start
  double bound = 0;
};
using BoundTrace = std::vector<TracePoint>;

// Iteration limits; at least one of them must be effective.
struct StopRule {
  int max_sweeps = INT_MAX;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  double eps = 1e-8;  // relative bound change per full sweep; <= 0 disables

  void validate() const {
    if (max_sweeps == INT_MAX && !std::isfinite(time_limit) && eps <= 0)
      throw usage_error("stop rule: no finite limit");
    if (max_sweeps < 0 || time_limit <= 0)
      throw usage_error("stop rule: invalid limit");
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Keeps recorded trace timestamps strictly increasing.
inline void push_trace(BoundTrace& trace, double elapsed, double bound) {
  if (!trace.empty() && elapsed <= trace.back().elapsed)
    elapsed = trace.back().elapsed + 1e-9;
  trace.push_back(TracePoint{elapsed, bound});
}

}  // namespace detail

// Fully decomposed bound: sum of per-table maxima plus any
// accumulated constant.
inline double decomposition_bound(std::span<const Factor> factors,
                                  double constant = 0.0) {
  double b = constant;
  for (const Factor& f : factors) b += f.max_value();
  return b;
}

// One max-marginal matching step on a factor pair: both are shifted by half
// the max-marginal gap over the scope intersection, preserving their sum.
inline std::pair<Factor, Factor> pairwise_match(const Factor& fa,
                                                const Factor& fb) {
  std::vector<VarId> s =
      detail::scope_intersect(fa.scope(), fb.scope());
  if (s.empty()) throw usage_error("pairwise_match: disjoint scopes");

  Factor ga = max_marginal(fa, s);
  Factor gb = max_marginal(fb, s);
  std::vector<double> dv(ga.size());
  for (std::size_t i = 0; i < dv.size(); ++i)
    dv[i] = 0.5 * (gb[i] - ga[i]);
  Factor delta(ga.scope(), ga.cards(), dv);
  for (double& d : dv) d = -d;
  Factor ndelta(ga.scope(), ga.cards(), std::move(dv));
  return {shift(fa, delta), shift(fb, ndelta)};
}

// Called after each full sweep with the current factor collection.
using SweepObserver = std::function<void(const std::vector<Factor>&)>;

struct FglpResult {
  GraphicalModel model;  // reparameterized; evaluates identically to input
  BoundTrace trace;      // initial bound, then one point per sweep
  bool converged = false;
  bool timed_out = false;
};

// Factor-graph LP tightening: sweeps variables in ascending id order and
// applies the simultaneous averaged max-marginal update to all factors
// containing the variable.
inline FglpResult fglp(const GraphicalModel& m, const StopRule& stop,
                       const SweepObserver& observer = {}) {
  stop.validate();
  detail::Stopwatch clock;

  std::vector<Factor> fs = m.factors();
  std::vector<std::vector<int>> incident(m.num_vars());
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (VarId v : fs[i].scope()) incident[std::size_t(v)].push_back(int(i));

  FglpResult r;
  double bound = decomposition_bound(fs);
  detail::push_trace(r.trace, clock.elapsed(), bound);

  for (int sweep = 0; sweep < stop.max_sweeps; ++sweep) {
    if (clock.elapsed() >= stop.time_limit) {
      r.timed_out = true;
      break;
    }
    for (std::size_t v = 0; v < m.num_vars(); ++v) {
      const auto& inc = incident[v];
      if (inc.size() < 2) continue;  // update is a no-op

      std::vector<VarId> s{VarId(v)};
      std::vector<Factor> gammas;
      gammas.reserve(inc.size());
      for (int fi : inc) gammas.push_back(max_marginal(fs[std::size_t(fi)], s));

      std::vector<double> meanv(gammas[0].size());
      for (std::size_t i = 0; i < meanv.size(); ++i) {
        double sum = 0;
        for (const Factor& g : gammas) sum += g[i];
        meanv[i] = clamp_log(sum / double(inc.size()));
      }

      for (std::size_t k = 0; k < inc.size(); ++k) {
        std::vector<double> dv(meanv.size());
        for (std::size_t i = 0; i < dv.size(); ++i)
          dv[i] = meanv[i] - gammas[k][i];
        Factor delta(gammas[k].scope(), gammas[k].cards(), std::move(dv));
        fs[std::size_t(inc[k])] = shift(fs[std::size_t(inc[k])], delta);
      }
    }

    double next = decomposition_bound(fs);
    detail::push_trace(r.trace, clock.elapsed(), next);
    if (observer) observer(fs);
    double rel = std::abs(next - bound) / std::max(1.0, std::abs(bound));
    bound = next;
    if (stop.eps > 0 && rel <= stop.eps) {
      r.converged = true;
      break;
    }
  }

  r.model = GraphicalModel(m.cards(), std::move(fs));
  return r;
}

struct JglpResult {
  JoinGraph graph;  // tightened cluster functions, same structure
  BoundTrace trace;
  bool converged = false;
  bool timed_out = false;
};

// Join-graph LP tightening: pairwise max-marginal matching over all join
// graph edges in the fixed structuring order, one pass per sweep.
inline JglpResult jglp(const JoinGraph& jg, const StopRule& stop,
                       const SweepObserver& observer = {}) {
  stop.validate();
  detail::Stopwatch clock;

  JglpResult r;
  r.graph = jg;
  auto& clusters = r.graph.clusters;

  auto current_bound = [&] {
    double b = r.graph.constant;
    for (const auto& c : clusters) b += c.fn.max_value();
    return b;
  };

  double bound = current_bound();
  detail::push_trace(r.trace, clock.elapsed(), bound);

  for (int sweep = 0; sweep < stop.max_sweeps; ++sweep) {
    if (clock.elapsed() >= stop.time_limit) {
      r.timed_out = true;
      break;
    }
    for (const JoinGraphEdge& e : r.graph.edges) {
      auto [fa, fb] = pairwise_match(clusters[std::size_t(e.a)].fn,
                                     clusters[std::size_t(e.b)].fn);
      clusters[std::size_t(e.a)].fn = std::move(fa);
      clusters[std::size_t(e.b)].fn = std::move(fb);
    }

    double next = current_bound();
    detail::push_trace(r.trace, clock.elapsed(), next);
    if (observer) observer(r.graph.cluster_functions());
    double rel = std::abs(next - bound) / std::max(1.0, std::abs(bound));
    bound = next;
    if (stop.eps > 0 && rel <= stop.eps) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// FGLP under the stop rule, then MBE(z) on the reparameterized factors.
inline BoundResult fglp_then_mbe(const GraphicalModel& m,
                                 const EliminationOrder& o, int z,
                                 const StopRule& stop,
                                 std::uint64_t budget = kDefaultMemoryBudget) {
  FglpResult pre = fglp(m, stop);
  return mini_bucket_elim(pre.model, o, z, budget);
}

}  // namespace maxsum

#endif  // MAXSUM_LP_HPP
