#pragma once

#include <stdexcept>
#include <string>

namespace sawlab {

// Violated precondition or malformed input. The CLI maps this to exit code 2.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Work or memory budget exhausted before a result could be certified.
// The CLI maps this to exit code 3.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace sawlab
