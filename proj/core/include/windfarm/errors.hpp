#pragma once

#include <stdexcept>

namespace windfarm {

/// Invalid user input: malformed config, inconsistent parameters, bad file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IdentificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AnalysisError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested controller design cannot be realized.
class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace windfarm
