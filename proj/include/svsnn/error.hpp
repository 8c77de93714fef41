#pragma once

#include <stdexcept>
#include <string>

namespace svsnn {

// Bad arguments: shape mismatches, non-finite inputs, out-of-range options.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Derivative order outside what a routine supports (spatial orders are capped at 2).
class UnsupportedOrder : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A model, problem and run configuration that do not fit together.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An object queried in the wrong lifecycle state (e.g. adjoints before backward()).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical evaluation failure at a specific point (division by zero, domain error).
class EvaluationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative solver exceeded its sweep budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Metric undefined for the supplied data (zero reference norm, all-zero spectrum).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GeometryDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoDominantFrequency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite row while assembling a Jacobian.
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svsnn
