#pragma once

#include <stdexcept>
#include <string>

namespace dynlaw {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shape or length mismatch between arguments.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Index outside its admissible range.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Invalid runtime input (non-finite values, wrong state length, ...).
class InputError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration (unknown kinds, empty grids, bad intervals, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Structural inconsistency between cores, patterns or ensembles.
class StructureError : public Error {
public:
  using Error::Error;
};

/// Dense materialisation refused because the entry count exceeds the cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// A gauge matrix is numerically singular.
class SingularGaugeError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A univariate factor cannot be expressed exactly in a dictionary.
class RepresentationError : public Error {
public:
  using Error::Error;
};

/// Coincident particles or similar singular configurations.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// Non-finite values encountered during optimisation.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace dynlaw
