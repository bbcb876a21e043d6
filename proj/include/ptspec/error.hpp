#pragma once

#include <stdexcept>
#include <string>

namespace ptspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the supported range (e.g. nu above the cap).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A grid or quadrature does not resolve the requested oscillation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A function is undefined or non-finite where it must be evaluated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed argument (negative threshold, empty family, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input whose norm is too small for a ratio to be meaningful.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Too few usable samples for a regression.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptspec
