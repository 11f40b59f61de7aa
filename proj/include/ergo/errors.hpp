#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

// Violated precondition: bad parameter, dimension mismatch, malformed input.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a map or CDF.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A derivative formula that degenerates at the requested point.
class SingularPoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Regression input that cannot produce a slope (too few points, nonpositive values, no signal).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace ergo
