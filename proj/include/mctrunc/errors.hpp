#pragma once

#include <stdexcept>
#include <string>

namespace mctrunc {

/// Malformed input: bad configuration, invalid model rows, out-of-range arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural assumption the certificates depend on does not hold
/// (irreducibility of G, Lyapunov drift, a singleton K where one is required).
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical postcondition failed: residual check, non-convergence,
/// nonpositive denominator. Bounds are never reported past one of these.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mctrunc
