#ifndef MAXSUM_MODEL_HPP
#define MAXSUM_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maxsum/factor.hpp"

namespace maxsum {

constexpr std::uint64_t kDefaultBruteForceCap = 1ull << 24;

// Variable cardinalities plus a factor list, max-sum semantics: the model
// value of a full assignment is the sum of all factor values at it.
class GraphicalModel {
 public:
  GraphicalModel() = default;

  explicit GraphicalModel(std::vector<int> cards,
                          std::vector<Factor> factors = {})
      : cards_(std::move(cards)) {
    for (int c : cards_)
      if (c < 1) throw model_error("model: cardinality must be >= 1");
    for (auto& f : factors) add_factor(std::move(f));
  }

  std::size_t num_vars() const { return cards_.size(); }
  int card(VarId v) const { return cards_[std::size_t(v)]; }
  const std::vector<int>& cards() const { return cards_; }
  Variable variable(VarId v) const { return Variable{v, card(v)}; }

  const std::vector<Factor>& factors() const { return factors_; }

  void add_factor(Factor f) {
    for (std::size_t p = 0; p < f.scope().size(); ++p) {
      VarId v = f.scope()[p];
      if (v < 0 || std::size_t(v) >= cards_.size())
        throw model_error("factor references unknown variable " +
                          std::to_string(v));
      if (f.cards()[p] != cards_[std::size_t(v)])
        throw model_error("factor disagrees on cardinality of variable " +
                          std::to_string(v));
    }
    factors_.push_back(std::move(f));
  }

 private:
  std::vector<int> cards_;
  std::vector<Factor> factors_;
};

// Sum of all factor entries selected by x; requires a full assignment.
inline double evaluate(const GraphicalModel& m, const Assignment& x) {
  if (x.size() != m.num_vars() || !x.full())
    throw usage_error("evaluate: assignment must cover every variable");
  double total = 0.0;
  for (const Factor& f : m.factors()) total += f.value_at(x);
  return total;
}

struct OptResult {
  double value = 0.0;
  Assignment argmax;
};

// Exhaustive optimum; ties broken toward the lexicographically smallest
// assignment (lowest value indices). Verification oracle.
inline OptResult brute_force_opt(const GraphicalModel& m,
                                 std::uint64_t cap = kDefaultBruteForceCap) {
  const std::size_t n = m.num_vars();
  std::uint64_t space = 1;
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t c = std::uint64_t(m.card(VarId(v)));
    if (space > cap / c)
      throw capacity_error("brute_force_opt: state space exceeds cap of " +
                           std::to_string(cap));
    space *= c;
  }

  OptResult best;
  best.value = -std::numeric_limits<double>::infinity();
  Assignment x(n);
  for (std::size_t v = 0; v < n; ++v) x.set(VarId(v), 0);
  for (std::uint64_t cfg = 0; cfg < space; ++cfg) {
    double val = evaluate(m, x);
    if (val > best.value) {
      best.value = val;
      best.argmax = x;
    }
    // odometer, variable n-1 fastest: first maximizer found is smallest
    for (int v = int(n) - 1; v >= 0; --v) {
      int next = x[VarId(v)] + 1;
      if (next < m.card(VarId(v))) {
        x.set(VarId(v), next);
        break;
      }
      x.set(VarId(v), 0);
    }
  }
  return best;
}

}  // namespace maxsum

#endif  // MAXSUM_MODEL_HPP
