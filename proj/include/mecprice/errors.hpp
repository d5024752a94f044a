#pragma once

#include <stdexcept>
#include <string>

namespace mecprice {

/// A physical or economic parameter is outside its admissible domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A link with zero rate was asked to carry data.
class InfeasibleLink : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The follower's first-order condition has a non-positive denominator,
/// i.e. the price is below what the energy ordering of the scenario allows.
class DegeneratePricing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs to a solver are mutually inconsistent.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mecprice
