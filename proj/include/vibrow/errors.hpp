#pragma once

#include <stdexcept>
#include <string>

namespace vibrow {

// Invalid or incomplete run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integrator or solver produced a result outside tolerance (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The second-order effective model is undefined: an intermediate level is
// degenerate with the W manifold.
class ResonanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace vibrow
