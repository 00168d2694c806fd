#pragma once

#include <stdexcept>
#include <string>

namespace coalweb {

// Malformed input: bad law text, out-of-window origins, empty sets.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// A module guard refused to run (finite-size bias, enumeration budget,
// flagged law). Carries enough text to identify the failing cell.
class GuardViolation : public std::runtime_error {
 public:
  explicit GuardViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coalweb
