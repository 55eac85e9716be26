#ifndef MAXSUM_FACTOR_HPP
#define MAXSUM_FACTOR_HPP

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maxsum/errors.hpp"

namespace maxsum {

using VarId = int;

// Log-space stand-in for ln(0). Kept finite so that shift arithmetic stays
// closed: floor - floor == 0 and floor + x never produces NaN.
constexpr double kLogZero = -1e30;

inline double clamp_log(double v) { return v < kLogZero ? kLogZero : v; }

struct Variable {
  VarId id = 0;
  int card = 1;
};

// Value indices per variable; -1 marks unassigned. May be partial.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t n) : val_(n, -1) {}

  std::size_t size() const { return val_.size(); }
  bool assigned(VarId v) const { return val_[std::size_t(v)] >= 0; }
  int operator[](VarId v) const {
    assert(std::size_t(v) < val_.size());
    return val_[std::size_t(v)];
  }
  void set(VarId v, int value) {
    assert(std::size_t(v) < val_.size());
    val_[std::size_t(v)] = value;
  }
  void clear(VarId v) { val_[std::size_t(v)] = -1; }

  bool full() const {
    return std::all_of(val_.begin(), val_.end(), [](int x) { return x >= 0; });
  }

  bool operator==(const Assignment& o) const { return val_ == o.val_; }

 private:
  std::vector<int> val_;
};

// Dense log-space table over a sorted scope of discrete variables.
// Layout is row-major with the last scope variable varying fastest.
// Factors are immutable values; all algebra returns new factors.
class Factor {
 public:
  Factor() : values_(1, 0.0) {}
  explicit Factor(double scalar) : values_(1, scalar) {}

  Factor(std::vector<VarId> scope, std::vector<int> cards,
         std::vector<double> values)
      : scope_(std::move(scope)),
        cards_(std::move(cards)),
        values_(std::move(values)) {
    if (scope_.size() != cards_.size())
      throw usage_error("factor: scope/cardinality size mismatch");
    if (!std::is_sorted(scope_.begin(), scope_.end()) ||
        std::adjacent_find(scope_.begin(), scope_.end()) != scope_.end())
      throw usage_error("factor: scope must be strictly increasing");
    std::size_t n = 1;
    for (int c : cards_) {
      if (c < 1) throw usage_error("factor: cardinality must be >= 1");
      n *= std::size_t(c);
    }
    if (values_.size() != n)
      throw usage_error("factor: table length does not match scope");
  }

  const std::vector<VarId>& scope() const { return scope_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  int arity() const { return int(scope_.size()); }
  bool scalar() const { return scope_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }

  bool contains(VarId v) const {
    return std::binary_search(scope_.begin(), scope_.end(), v);
  }

  // Position of v in the scope, or -1.
  int position(VarId v) const {
    auto it = std::lower_bound(scope_.begin(), scope_.end(), v);
    return (it != scope_.end() && *it == v) ? int(it - scope_.begin()) : -1;
  }

  int card(VarId v) const {
    int p = position(v);
    assert(p >= 0);
    return cards_[std::size_t(p)];
  }

  // Stride of scope position p (last position has stride 1).
  std::size_t stride(int p) const {
    std::size_t s = 1;
    for (std::size_t j = std::size_t(p) + 1; j < cards_.size(); ++j)
      s *= std::size_t(cards_[j]);
    return s;
  }

  double max_value() const {
    return *std::max_element(values_.begin(), values_.end());
  }

  // Linear index of the configuration selected by x; every scope variable
  // must be assigned.
  std::size_t index_of(const Assignment& x) const {
    std::size_t idx = 0;
    for (std::size_t p = 0; p < scope_.size(); ++p) {
      VarId v = scope_[p];
      if (std::size_t(v) >= x.size() || !x.assigned(v))
        throw usage_error("factor: scope variable " + std::to_string(v) +
                          " unassigned");
      idx = idx * std::size_t(cards_[p]) + std::size_t(x[v]);
    }
    return idx;
  }

  double value_at(const Assignment& x) const { return values_[index_of(x)]; }

 private:
  std::vector<VarId> scope_;
  std::vector<int> cards_;
  std::vector<double> values_;
};

namespace detail {

// Strides of `f` laid out against positions of the (sorted) result scope;
// zero where the result variable does not occur in f.
inline std::vector<std::size_t> strides_in(const std::vector<VarId>& scope,
                                           const Factor& f) {
  std::vector<std::size_t> s(scope.size(), 0);
  for (std::size_t p = 0; p < scope.size(); ++p) {
    int q = f.position(scope[p]);
    if (q >= 0) s[p] = f.stride(q);
  }
  return s;
}

}  // namespace detail

// Pointwise sum over the union scope (log-space combination), clamped at the
// log floor. Throws model_error if a shared variable's cardinalities differ.
inline Factor combine(const Factor& f, const Factor& g) {
  std::vector<VarId> scope;
  std::vector<int> cards;
  std::size_t i = 0, j = 0;
  while (i < f.scope().size() || j < g.scope().size()) {
    if (j == g.scope().size() ||
        (i < f.scope().size() && f.scope()[i] < g.scope()[j])) {
      scope.push_back(f.scope()[i]);
      cards.push_back(f.cards()[i]);
      ++i;
    } else if (i == f.scope().size() || g.scope()[j] < f.scope()[i]) {
      scope.push_back(g.scope()[j]);
      cards.push_back(g.cards()[j]);
      ++j;
    } else {
      if (f.cards()[i] != g.cards()[j])
        throw model_error("combine: conflicting cardinalities for variable " +
                          std::to_string(f.scope()[i]));
      scope.push_back(f.scope()[i]);
      cards.push_back(f.cards()[i]);
      ++i;
      ++j;
    }
  }

  const int k = int(scope.size());
  std::vector<std::size_t> fs = detail::strides_in(scope, f);
  std::vector<std::size_t> gs = detail::strides_in(scope, g);
  std::size_t n = 1;
  for (int c : cards) n *= std::size_t(c);

  std::vector<double> out(n);
  std::vector<int> digit(std::size_t(k), 0);
  std::size_t fi = 0, gi = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    out[idx] = clamp_log(f[fi] + g[gi]);
    int p = k - 1;
    for (; p >= 0; --p) {
      ++digit[std::size_t(p)];
      fi += fs[std::size_t(p)];
      gi += gs[std::size_t(p)];
      if (digit[std::size_t(p)] < cards[std::size_t(p)]) break;
      fi -= fs[std::size_t(p)] * std::size_t(cards[std::size_t(p)]);
      gi -= gs[std::size_t(p)] * std::size_t(cards[std::size_t(p)]);
      digit[std::size_t(p)] = 0;
    }
  }
  return Factor(std::move(scope), std::move(cards), std::move(out));
}

namespace detail {

// Max-projection of f onto `keep` (sorted subset of f's scope).
inline Factor project_max(const Factor& f, const std::vector<VarId>& keep) {
  std::vector<int> kcards(keep.size());
  for (std::size_t p = 0; p < keep.size(); ++p) kcards[p] = f.card(keep[p]);

  std::size_t m = 1;
  for (int c : kcards) m *= std::size_t(c);
  std::vector<double> out(m, -std::numeric_limits<double>::infinity());

  // result strides seen from f's positions
  std::vector<std::size_t> rs(f.scope().size(), 0);
  {
    std::size_t stride = 1;
    for (int p = int(keep.size()) - 1; p >= 0; --p) {
      int q = f.position(keep[std::size_t(p)]);
      rs[std::size_t(q)] = stride;
      stride *= std::size_t(kcards[std::size_t(p)]);
    }
  }

  const int k = f.arity();
  std::vector<int> digit(std::size_t(k), 0);
  std::size_t ri = 0;
  for (std::size_t fi = 0; fi < f.size(); ++fi) {
    if (f[fi] > out[ri]) out[ri] = f[fi];
    int p = k - 1;
    for (; p >= 0; --p) {
      ++digit[std::size_t(p)];
      ri += rs[std::size_t(p)];
      if (digit[std::size_t(p)] < f.cards()[std::size_t(p)]) break;
      ri -= rs[std::size_t(p)] * std::size_t(f.cards()[std::size_t(p)]);
      digit[std::size_t(p)] = 0;
    }
  }
  return Factor(keep, std::move(kcards), std::move(out));
}

}  // namespace detail

// Eliminate v by maximization; eliminating the last variable yields a scalar.
inline Factor max_eliminate(const Factor& f, VarId v) {
  if (!f.contains(v))
    throw usage_error("max_eliminate: variable " + std::to_string(v) +
                      " not in scope");
  std::vector<VarId> keep;
  keep.reserve(f.scope().size() - 1);
  for (VarId u : f.scope())
    if (u != v) keep.push_back(u);
  return detail::project_max(f, keep);
}

// Max-marginal onto S (any subset of the scope, any order; duplicates folded).
inline Factor max_marginal(const Factor& f, std::span<const VarId> s) {
  std::vector<VarId> keep(s.begin(), s.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (VarId v : keep)
    if (!f.contains(v))
      throw usage_error("max_marginal: variable " + std::to_string(v) +
                        " not in scope");
  return detail::project_max(f, keep);
}

// Pointwise addition of delta broadcast over f's scope. Same as combine but
// requires scope(delta) to be contained in scope(f), so the result keeps f's
// scope; provided for clarity of the LP updates.
inline Factor shift(const Factor& f, const Factor& delta) {
  for (VarId v : delta.scope())
    if (!f.contains(v))
      throw usage_error("shift: delta variable " + std::to_string(v) +
                        " outside factor scope");
  return combine(f, delta);
}

}  // namespace maxsum

#endif  // MAXSUM_FACTOR_HPP
