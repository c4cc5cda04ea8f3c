#pragma once

#include <stdexcept>
#include <string>

namespace mcbf {

/// Invalid scenario or topology parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called on data that is not in the required state
/// (missing beamformers, missing duals, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed conic problem (dimension mismatch, non-Hermitian data, ...).
class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The interior-point solver could not decide a feasibility question.
class IndeterminateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The SINR targets cannot be met by the relaxed problem.
class InfeasibleTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distributed algorithm could not start from the supplied ICI levels.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcbf
