#pragma once

#include <stdexcept>
#include <string>

namespace hdd {

// Error taxonomy shared by the core and mapped 1:1 onto hdd_status codes at the
// C boundary.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: dimension mismatch, non-finite input, out-of-range index.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: NaN parameters, leverage overflow, singular system.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Spectrum collapsed to zero where a non-zero eigenvalue was required.
class CollapseError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Problem exceeds a configured size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdd
