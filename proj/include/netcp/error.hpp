#pragma once

#include <stdexcept>
#include <string>

namespace netcp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (matrix side lengths, mask sizes, window members).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed (SVD non-convergence, NaN in an iterate).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid tuning parameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Profile estimation from training data could not produce usable parameters.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed stream file, profile document or scenario document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operation not allowed in the current detector state.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace netcp
