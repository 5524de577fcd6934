#pragma once

#include <stdexcept>
#include <string>

namespace locred {

/// Invalid user input: mesh sizes, field specs, decomposition geometry, config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve failed (indefinite matrix, residual contract not met).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A partition of unity could not be built for the requested geometry.
class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace locred
