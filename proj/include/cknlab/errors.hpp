#pragma once

#include <stdexcept>
#include <string>

namespace cknlab {

// Improper integral that does not converge for the requested profile/weights.
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters violate the hypotheses of the requested regime or theorem.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroDenominator : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unknown run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cknlab
