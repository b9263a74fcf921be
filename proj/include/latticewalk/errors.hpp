#pragma once

#include <stdexcept>
#include <string>

namespace latticewalk {

// Thrown when a numeric invariant breaks (norm drift, eigenvalue clip
// overflow). Distinct from std::domain_error so callers can map it to a
// dedicated exit code.
class NumericViolation : public std::runtime_error {
 public:
  explicit NumericViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latticewalk
