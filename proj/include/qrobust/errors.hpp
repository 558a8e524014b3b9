#pragma once

#include <stdexcept>
#include <string>

namespace qrobust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with non-conforming shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be Hermitian (or unitary) is not, within tolerance.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failure or a non-finite result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Step, control or basis-slot index outside its range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Zero matrix passed where a normalizable direction is required.
class DegenerateStructureError : public Error {
 public:
  using Error::Error;
};

/// The gate overlap vanished, so the fidelity phase (and any derivative of the
/// error) is undefined at this operating point.
class UndefinedPhaseError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Unparseable or invalid configuration. Carries the source location when known.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or incomplete data file (controller table, CSV).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace qrobust
