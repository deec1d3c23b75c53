#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

// Argument outside the mathematical domain of an operation (|v| >= 1 boost,
// non-timelike momentum, a2 outside [0,1], off-shell (E, p), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bohm momentum requested at a node of the wavefunction.
class NodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Peaks overlap too much for a per-peak weight to be meaningful.
class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two hits are not spacelike separated; the second lies in the first's cone.
class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The perturbative series is evaluated outside the regime where it can be
// trusted.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Goursat boundary data cannot be written as a single function of the
// characteristic variable.
class ConsistencyError : public std::runtime_error {
 public:
  ConsistencyError(const std::string& what, double max_discrepancy)
      : std::runtime_error(what + " (max discrepancy " +
                           std::to_string(max_discrepancy) + ")"),
        max_discrepancy_(max_discrepancy) {}

  double max_discrepancy() const noexcept { return max_discrepancy_; }

 private:
  double max_discrepancy_;
};

}  // namespace collapse
