#ifndef MAXSUM_UAI_HPP
#define MAXSUM_UAI_HPP

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "maxsum/model.hpp"

namespace maxsum {

// Observed value index per variable.
using EvidenceSet = std::map<VarId, int>;

namespace detail {

// Whitespace-insensitive token reader tracking 1-based line numbers.
class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  // line of the most recently read token (or current position at EOF)
  int line() const { return tok_line_; }

  bool try_next(std::string& tok) {
    tok.clear();
    int c;
    while ((c = in_.get()) != EOF && std::isspace(c)) {
      if (c == '\n') ++line_;
    }
    tok_line_ = line_;
    if (c == EOF) return false;
    tok.push_back(char(c));
    while ((c = in_.get()) != EOF && !std::isspace(c)) tok.push_back(char(c));
    if (c == '\n') ++line_;
    return true;
  }

  std::string next(const char* what) {
    std::string tok;
    if (!try_next(tok))
      throw parse_error(line_, std::string("unexpected end of input, expected ") + what);
    return tok;
  }

  long next_int(const char* what) {
    std::string tok = next(what);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size())
      throw parse_error(line_, "expected integer " + std::string(what) +
                                   ", got '" + tok + "'");
    return v;
  }

  double next_real(const char* what) {
    std::string tok = next(what);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size())
      throw parse_error(line_, "expected number " + std::string(what) +
                                   ", got '" + tok + "'");
    return v;
  }

 private:
  std::istream& in_;
  int line_ = 1;
  int tok_line_ = 1;
};

}  // namespace detail

// Parse a UAI-format model. MARKOV and BAYES tables are both read as
// nonnegative reals and stored as natural logs; zero entries map to the log
// floor. Factors are re-laid-out to sorted scope with the last variable
// fastest (the file's own layout has the last *listed* variable fastest).
inline GraphicalModel parse_uai(std::istream& in) {
  detail::Tokenizer tok(in);

  std::string header = tok.next("MARKOV or BAYES header");
  if (header != "MARKOV" && header != "BAYES")
    throw parse_error(tok.line(), "unknown header '" + header + "'");

  long n = tok.next_int("variable count");
  if (n < 0) throw parse_error(tok.line(), "negative variable count");
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    long c = tok.next_int("cardinality");
    if (c < 1) throw parse_error(tok.line(), "cardinality must be >= 1");
    cards[std::size_t(i)] = int(c);
  }

  long m = tok.next_int("factor count");
  if (m < 0) throw parse_error(tok.line(), "negative factor count");

  std::vector<std::vector<VarId>> file_scopes(static_cast<std::size_t>(m));
  for (long f = 0; f < m; ++f) {
    long arity = tok.next_int("factor arity");
    if (arity < 0) throw parse_error(tok.line(), "negative factor arity");
    auto& scope = file_scopes[std::size_t(f)];
    for (long p = 0; p < arity; ++p) {
      long v = tok.next_int("scope variable");
      if (v < 0 || v >= n)
        throw parse_error(tok.line(), "scope variable " + std::to_string(v) +
                                          " out of range");
      for (VarId seen : scope)
        if (seen == VarId(v))
          throw parse_error(tok.line(), "duplicate variable " +
                                            std::to_string(v) + " in scope");
      scope.push_back(VarId(v));
    }
  }

  GraphicalModel model(cards);
  for (long f = 0; f < m; ++f) {
    const auto& fscope = file_scopes[std::size_t(f)];
    std::size_t expect = 1;
    for (VarId v : fscope) expect *= std::size_t(cards[std::size_t(v)]);

    long count = tok.next_int("table entry count");
    if (count < 0 || std::size_t(count) != expect)
      throw parse_error(tok.line(),
                        "table of factor " + std::to_string(f) + " has " +
                            std::to_string(count) + " entries, expected " +
                            std::to_string(expect));

    std::vector<VarId> scope = fscope;
    std::sort(scope.begin(), scope.end());
    std::vector<int> scards(scope.size());
    for (std::size_t p = 0; p < scope.size(); ++p)
      scards[p] = cards[std::size_t(scope[p])];

    // stride of each file-scope position in the internal layout
    std::vector<std::size_t> istride(fscope.size());
    {
      Factor probe(scope, scards, std::vector<double>(expect, 0.0));
      for (std::size_t p = 0; p < fscope.size(); ++p)
        istride[p] = probe.stride(probe.position(fscope[p]));
    }

    std::vector<double> values(expect, 0.0);
    std::vector<int> digit(fscope.size(), 0);
    std::size_t ii = 0;  // internal index of the current file entry
    for (std::size_t e = 0; e < expect; ++e) {
      double raw = tok.next_real("table entry");
      if (raw < 0.0)
        throw parse_error(tok.line(), "negative table entry");
      values[ii] = raw == 0.0 ? kLogZero : std::log(raw);
      // advance file config, last listed variable fastest
      for (int p = int(fscope.size()) - 1; p >= 0; --p) {
        VarId v = fscope[std::size_t(p)];
        ++digit[std::size_t(p)];
        ii += istride[std::size_t(p)];
        if (digit[std::size_t(p)] < cards[std::size_t(v)]) break;
        ii -= istride[std::size_t(p)] * std::size_t(cards[std::size_t(v)]);
        digit[std::size_t(p)] = 0;
      }
    }
    model.add_factor(Factor(std::move(scope), std::move(scards), std::move(values)));
  }
  return model;
}

inline GraphicalModel parse_uai(const std::string& text) {
  std::istringstream in(text);
  return parse_uai(in);
}

// Write a model in UAI format (MARKOV header, internal sorted-scope layout,
// entries as plain reals; the log floor becomes 0).
inline void write_uai(const GraphicalModel& m, std::ostream& out) {
  out << "MARKOV\n" << m.num_vars() << "\n";
  for (std::size_t v = 0; v < m.num_vars(); ++v) {
    if (v) out << ' ';
    out << m.card(VarId(v));
  }
  out << "\n" << m.factors().size() << "\n";
  for (const Factor& f : m.factors()) {
    out << f.arity();
    for (VarId v : f.scope()) out << ' ' << v;
    out << "\n";
  }
  char buf[64];
  for (const Factor& f : m.factors()) {
    out << "\n" << f.size() << "\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
      double raw = f[i] <= kLogZero ? 0.0 : std::exp(f[i]);
      std::snprintf(buf, sizeof(buf), "%.17g", raw);
      out << buf << (i + 1 == f.size() ? "\n" : " ");
    }
  }
}

// Evidence file: count k, then k "var value" pairs.
inline EvidenceSet parse_evidence(std::istream& in, const GraphicalModel& m) {
  detail::Tokenizer tok(in);
  long k = tok.next_int("evidence count");
  if (k < 0) throw parse_error(tok.line(), "negative evidence count");
  EvidenceSet ev;
  for (long i = 0; i < k; ++i) {
    long v = tok.next_int("evidence variable");
    if (v < 0 || std::size_t(v) >= m.num_vars())
      throw parse_error(tok.line(),
                        "evidence variable " + std::to_string(v) + " out of range");
    long val = tok.next_int("evidence value");
    if (val < 0 || val >= m.card(VarId(v)))
      throw parse_error(tok.line(), "evidence value " + std::to_string(val) +
                                        " out of range for variable " +
                                        std::to_string(v));
    if (!ev.emplace(VarId(v), int(val)).second)
      throw parse_error(tok.line(),
                        "duplicate evidence variable " + std::to_string(v));
  }
  return ev;
}

inline EvidenceSet parse_evidence(const std::string& text,
                                  const GraphicalModel& m) {
  std::istringstream in(text);
  return parse_evidence(in, m);
}

// Slice every factor at the observed values and drop the evidence variables;
// remaining variables are renumbered densely, order preserved. If new_to_old
// is given it receives the id mapping of the conditioned model.
inline GraphicalModel condition(const GraphicalModel& m, const EvidenceSet& ev,
                                std::vector<VarId>* new_to_old = nullptr) {
  for (auto [v, val] : ev) {
    if (v < 0 || std::size_t(v) >= m.num_vars())
      throw usage_error("condition: evidence variable out of range");
    if (val < 0 || val >= m.card(v))
      throw usage_error("condition: evidence value out of range");
  }

  std::vector<VarId> remap(m.num_vars(), -1);
  std::vector<int> cards;
  std::vector<VarId> back;
  for (std::size_t v = 0; v < m.num_vars(); ++v) {
    if (ev.count(VarId(v))) continue;
    remap[v] = VarId(cards.size());
    cards.push_back(m.card(VarId(v)));
    back.push_back(VarId(v));
  }

  GraphicalModel out(cards);
  for (const Factor& f : m.factors()) {
    std::vector<VarId> nscope;
    std::vector<int> ncards;
    for (std::size_t p = 0; p < f.scope().size(); ++p) {
      VarId v = f.scope()[p];
      if (!ev.count(v)) {
        nscope.push_back(remap[std::size_t(v)]);
        ncards.push_back(f.cards()[p]);
      }
    }
    std::size_t sz = 1;
    for (int c : ncards) sz *= std::size_t(c);
    std::vector<double> values(sz);

    std::vector<int> digit(nscope.size(), 0);
    for (std::size_t i = 0; i < sz; ++i) {
      // old index with evidence digits pinned
      std::size_t oi = 0;
      std::size_t kp = 0;
      for (std::size_t p = 0; p < f.scope().size(); ++p) {
        VarId v = f.scope()[p];
        auto it = ev.find(v);
        int d = it != ev.end() ? it->second : digit[kp++];
        oi = oi * std::size_t(f.cards()[p]) + std::size_t(d);
      }
      values[i] = f[oi];
      for (int p = int(nscope.size()) - 1; p >= 0; --p) {
        if (++digit[std::size_t(p)] < ncards[std::size_t(p)]) break;
        digit[std::size_t(p)] = 0;
      }
    }
    out.add_factor(Factor(std::move(nscope), std::move(ncards), std::move(values)));
  }
  if (new_to_old) *new_to_old = std::move(back);
  return out;
}

constexpr double kLn10 = 2.302585092994045684;

// "STATUS <exact|bound> LN <v> LOG10 <v/ln10>"
inline std::string format_result_line(const char* status, double ln_value) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "STATUS %s LN %.6f LOG10 %.6f", status,
                ln_value, ln_value / kLn10);
  return buf;
}

// CSV trace writer: header "elapsed_seconds,<value_column>", one row per
// recorded improvement.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, const char* value_column) : out_(out) {
    out_ << "elapsed_seconds," << value_column << "\n";
  }

  void row(double elapsed, double value) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.6f,%.10g", elapsed, value);
    out_ << buf << "\n";
  }

 private:
  std::ostream& out_;
};

}  // namespace maxsum

#endif  // MAXSUM_UAI_HPP
