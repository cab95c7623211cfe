#pragma once

#include <stdexcept>
#include <string>

namespace qprl {

// Bad configuration (out-of-range qubit counts, mismatched layouts, ...).
// Distinct from std::invalid_argument, which we reserve for bad call
// arguments against an otherwise valid configuration.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finite ones are required (logits, losses).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qprl
