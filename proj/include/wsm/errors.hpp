#pragma once

#include <stdexcept>
#include <string>

namespace wsm {

/// Bad user input or a violated precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a physical formula (z <= 0, T <= 0, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterative method (bisection, inverse iteration, adaptive quadrature)
/// failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// On-disk cache entry that fails its integrity check.
class CacheError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace wsm
