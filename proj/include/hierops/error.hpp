#pragma once

#include <stdexcept>
#include <string>

namespace hierops {

/// Out-of-range site, level or malformed vector argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid model, distribution or run parameters. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested volume exceeds the configured dense-storage cap.
class CapacityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Base for failures of a numerical procedure. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigensolver non-convergence or a failed residual certificate.
class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Estimator called with too little data (empty window, too few levels).
class StatisticsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// SDE integrator could not separate two particles.
class CollisionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hierops
