#pragma once

#include <stdexcept>
#include <string>

namespace chainfrag {

/// Malformed input: bad subset, tree, rate vector or time value.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exact enumeration would exceed its configured term budget.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity that the theory guarantees (positive denominator, probability
/// inside [0,1]) came out wrong. Indicates a bug, not bad input.
class consistency_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define CHAINFRAG_REQUIRE(cond, msg)                                   \
  do {                                                                 \
    if (!(cond)) throw ::chainfrag::invalid_input(std::string(msg));   \
  } while (0)

}  // namespace chainfrag
