#ifndef MAXSUM_TESTS_TESTUTIL_HPP
#define MAXSUM_TESTS_TESTUTIL_HPP

#include <random>
#include <vector>

#include "maxsum/maxsum.hpp"

namespace testutil {

using namespace maxsum;

// Three-variable triangle fixture, in log space:
//   f12 = [[0,1],[2,0]], f23 = [[0,3],[1,0]], f13 = [[3,0],[0,2]]
// (ids 0,1,2). Optimum 7 at (1,0,1).
inline GraphicalModel m3() {
  GraphicalModel m(std::vector<int>{2, 2, 2});
  m.add_factor(Factor({0, 1}, {2, 2}, {0, 1, 2, 0}));
  m.add_factor(Factor({1, 2}, {2, 2}, {0, 3, 1, 0}));
  m.add_factor(Factor({0, 2}, {2, 2}, {3, 0, 0, 2}));
  return m;
}

inline double uniform_value(std::mt19937_64& rng, double lo = -5.0,
                            double hi = 5.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Factor random_factor(std::mt19937_64& rng, std::vector<VarId> scope,
                            const std::vector<int>& model_cards) {
  std::sort(scope.begin(), scope.end());
  std::vector<int> cards;
  std::size_t sz = 1;
  for (VarId v : scope) {
    cards.push_back(model_cards[std::size_t(v)]);
    sz *= std::size_t(cards.back());
  }
  std::vector<double> values(sz);
  for (double& x : values) x = uniform_value(rng);
  return Factor(std::move(scope), std::move(cards), std::move(values));
}

// pick k distinct variable ids
inline std::vector<VarId> random_scope(std::mt19937_64& rng, int n, int k) {
  std::vector<VarId> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::size_t(k));
  std::sort(all.begin(), all.end());
  return all;
}

// Mixed unary/pairwise/ternary model, n in [4,10], cardinalities in [2,3],
// log values U[-5,5].
inline GraphicalModel random_model(std::mt19937_64& rng) {
  int n = uniform_int(rng, 4, 10);
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (int& c : cards) c = uniform_int(rng, 2, 3);
  GraphicalModel m(cards);

  int unary = uniform_int(rng, 1, n / 2);
  int pairwise = uniform_int(rng, n - 1, 2 * n);
  int ternary = uniform_int(rng, 0, n / 3);

  for (int i = 0; i < unary; ++i)
    m.add_factor(random_factor(rng, random_scope(rng, n, 1), cards));
  for (int i = 0; i < pairwise; ++i)
    m.add_factor(random_factor(rng, random_scope(rng, n, 2), cards));
  for (int i = 0; i < ternary; ++i)
    m.add_factor(random_factor(rng, random_scope(rng, n, 3), cards));
  return m;
}

// Tree-structured pairwise model plus a few unaries.
inline GraphicalModel random_tree_model(std::mt19937_64& rng, int min_vars = 4,
                                        int max_vars = 10) {
  int n = uniform_int(rng, min_vars, max_vars);
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (int& c : cards) c = uniform_int(rng, 2, 3);
  GraphicalModel m(cards);
  for (int v = 1; v < n; ++v) {
    int p = uniform_int(rng, 0, v - 1);
    m.add_factor(random_factor(rng, {VarId(p), VarId(v)}, cards));
  }
  int unary = uniform_int(rng, 0, n / 2);
  for (int i = 0; i < unary; ++i)
    m.add_factor(random_factor(rng, random_scope(rng, n, 1), cards));
  return m;
}

// Smallest z satisfying the mini-bucket precondition z+1 >= max factor arity.
inline int min_feasible_z(const GraphicalModel& m) {
  int z = 1;
  for (const Factor& f : m.factors()) z = std::max(z, f.arity() - 1);
  return z;
}

inline Assignment random_assignment(const GraphicalModel& m,
                                    std::mt19937_64& rng) {
  Assignment x(m.num_vars());
  for (std::size_t v = 0; v < m.num_vars(); ++v)
    x.set(VarId(v), uniform_int(rng, 0, m.card(VarId(v)) - 1));
  return x;
}

// Enumeration oracle for factor combination: walks every joint configuration
// of the union scope and adds the projected entries. Independent of the
// implementation's stride bookkeeping.
inline Factor oracle_combine(const Factor& f, const Factor& g, int num_vars) {
  std::vector<VarId> scope;
  std::vector<int> cards;
  for (VarId v = 0; v < num_vars; ++v) {
    if (f.contains(v)) {
      scope.push_back(v);
      cards.push_back(f.card(v));
    } else if (g.contains(v)) {
      scope.push_back(v);
      cards.push_back(g.card(v));
    }
  }
  std::size_t sz = 1;
  for (int c : cards) sz *= std::size_t(c);
  std::vector<double> values(sz);

  Assignment x(static_cast<std::size_t>(num_vars));
  std::vector<int> digit(scope.size(), 0);
  for (std::size_t i = 0; i < sz; ++i) {
    for (std::size_t p = 0; p < scope.size(); ++p) x.set(scope[p], digit[p]);
    values[i] = clamp_log(f.value_at(x) + g.value_at(x));
    for (int p = int(scope.size()) - 1; p >= 0; --p) {
      if (++digit[std::size_t(p)] < cards[std::size_t(p)]) break;
      digit[std::size_t(p)] = 0;
    }
  }
  return Factor(std::move(scope), std::move(cards), std::move(values));
}

// Enumeration oracle for max-projection onto `keep`.
inline Factor oracle_max_marginal(const Factor& f, std::vector<VarId> keep,
                                  int num_vars) {
  std::sort(keep.begin(), keep.end());
  std::vector<int> kcards;
  for (VarId v : keep) kcards.push_back(f.card(v));
  std::size_t sz = 1;
  for (int c : kcards) sz *= std::size_t(c);
  std::vector<double> values(sz, -std::numeric_limits<double>::infinity());

  // walk all configurations of f's scope
  Assignment x(static_cast<std::size_t>(num_vars));
  std::vector<int> digit(f.scope().size(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t p = 0; p < f.scope().size(); ++p)
      x.set(f.scope()[p], digit[p]);
    std::size_t ki = 0;
    for (std::size_t p = 0; p < keep.size(); ++p)
      ki = ki * std::size_t(kcards[p]) + std::size_t(x[keep[p]]);
    values[ki] = std::max(values[ki], f.value_at(x));
    for (int p = int(f.scope().size()) - 1; p >= 0; --p) {
      if (++digit[std::size_t(p)] < f.cards()[std::size_t(p)]) break;
      digit[std::size_t(p)] = 0;
    }
  }
  return Factor(std::move(keep), std::move(kcards), std::move(values));
}

// Max over all completions of the unassigned variables of the sum of the
// selected factors (all factors when `which` is empty), given partial x.
inline double oracle_best_completion(const GraphicalModel& m, Assignment x,
                                     const std::vector<int>& which = {}) {
  std::vector<VarId> free;
  for (std::size_t v = 0; v < m.num_vars(); ++v)
    if (!x.assigned(VarId(v))) free.push_back(VarId(v));

  std::vector<int> idx = which;
  if (idx.empty())
    for (std::size_t i = 0; i < m.factors().size(); ++i) idx.push_back(int(i));

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> digit(free.size(), 0);
  std::size_t total = 1;
  for (VarId v : free) total *= std::size_t(m.card(v));
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t p = 0; p < free.size(); ++p) x.set(free[p], digit[p]);
    double s = 0;
    for (int fi : idx) s += m.factors()[std::size_t(fi)].value_at(x);
    best = std::max(best, s);
    for (int p = int(free.size()) - 1; p >= 0; --p) {
      if (++digit[std::size_t(p)] < m.card(free[std::size_t(p)])) break;
      digit[std::size_t(p)] = 0;
    }
  }
  return best;
}

}  // namespace testutil

#endif  // MAXSUM_TESTS_TESTUTIL_HPP
