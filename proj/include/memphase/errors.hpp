#pragma once

#include <stdexcept>
#include <string>

namespace memphase {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit-code taxonomy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown keys, unsupported geometry/split
/// combinations, boxes too small for the requested tube.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical domain violations (non-finite input, focal points, skeleton
/// projections, stagnating line searches).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched grid specs or too few points along an axis.
class ShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace memphase
