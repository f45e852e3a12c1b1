#pragma once

#include <stdexcept>
#include <string>

namespace affsob {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integrand decays too slowly for the weighted measure t^a dt dx.
class NonIntegrable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A test function with a vanishing directional norm.
class DegenerateFunction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entropy requested for a function whose weighted L^p norm is not one.
class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative step (maximization, extrapolation) failed to settle.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrand produced NaN/inf at a quadrature node.
class NonFiniteValue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or function/body specification; the message names the location.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affsob
