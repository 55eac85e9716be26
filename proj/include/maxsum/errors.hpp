#ifndef MAXSUM_ERRORS_HPP
#define MAXSUM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace maxsum {

// Violated operation precondition (caller bug).
struct usage_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Inconsistent model data, e.g. two factors disagreeing on a variable's
// cardinality.
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Predicted table memory or state-space size exceeds the configured budget.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A factor has more than z+1 variables and cannot be placed in any
// mini-bucket.
struct infeasible_z_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line of the offending token.
class parse_error : public std::runtime_error {
 public:
  parse_error(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace maxsum

#endif  // MAXSUM_ERRORS_HPP
