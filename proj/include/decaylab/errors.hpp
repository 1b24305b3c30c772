#pragma once

#include <stdexcept>

namespace decaylab {

/// Parameter outside its admissible range (negative endpoint exponent,
/// nonpositive threshold, divergent moment requested, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A ratio of integrals was requested too close to a zero of the denominator.
class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit was asked for with fewer points than it needs.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace decaylab
