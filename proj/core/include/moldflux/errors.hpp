#pragma once

#include <stdexcept>
#include <string>

namespace moldflux {

// Invalid user-supplied value (geometry, counts, config fields).
class InvalidArgument : public std::runtime_error {
 public:
  explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

// Point or index outside the computational domain.
class OutOfDomain : public InvalidArgument {
 public:
  explicit OutOfDomain(const std::string& msg) : InvalidArgument(msg) {}
};

// Operation called on an object missing required state (e.g. dropped snapshots).
class InvalidState : public std::runtime_error {
 public:
  explicit InvalidState(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative linear solver failed to reach tolerance; message carries the residual.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense factorization hit a (numerically) singular matrix.
class SingularMatrix : public SolverError {
 public:
  explicit SingularMatrix(const std::string& msg) : SolverError(msg) {}
};

// Scalar minimizer could not produce a finite result.
class OptimizationFailure : public std::runtime_error {
 public:
  explicit OptimizationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration file rejected (missing section, unknown key, bad value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace moldflux
