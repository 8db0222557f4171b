#pragma once

#include <stdexcept>
#include <string>

namespace qcorr {

// Base class for every exception thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A constructed or evolved state fails density-matrix validation.
class NonPhysicalParams : public Error {
 public:
  using Error::Error;
};

// A scalar argument lies outside its documented domain.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// A function was evaluated at a point where its formula is singular.
class DomainError : public Error {
 public:
  using Error::Error;
};

// gamma +- gamma12 is numerically zero, so the amplitude coefficients diverge.
class DegenerateCoupling : public Error {
 public:
  using Error::Error;
};

// A matrix does not have the X-type structure an operation requires.
class StructureMismatch : public Error {
 public:
  using Error::Error;
};

// Branch matching between two grid points is materially ambiguous.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

// A bracket handed to the root refiner does not change sign.
class NoSignChange : public Error {
 public:
  using Error::Error;
};

// An entropy argument is not a probability vector.
class NotAProbabilityVector : public Error {
 public:
  using Error::Error;
};

// Trace drift in the integrator exceeded tolerance.
class StepSizeTooLarge : public Error {
 public:
  using Error::Error;
};

// A scenario config is syntactically or semantically malformed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A built-in scenario name is not recognised.
class UnknownScenario : public Error {
 public:
  using Error::Error;
};

// An output file or directory could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcorr
