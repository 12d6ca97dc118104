#pragma once

#include <stdexcept>
#include <string>

namespace rplab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid lattice geometry or an element outside of it.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A functional or probe is not supported where the operation requires it
/// (e.g. not strictly inside the positive half-lattice).
class SupportError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configuration budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for the requested gauge group or model.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// An exact correlator vanished where a logarithm is required.
class ZeroCorrelatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace rplab
