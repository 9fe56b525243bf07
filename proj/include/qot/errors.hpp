#pragma once

#include <stdexcept>
#include <string>

namespace qot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input data violates a structural requirement (hermiticity, involution, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A scalar function was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Precondition of an operation is not met (singular density, bad rhs, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The problem is structurally degenerate (e.g. non-ergodic generator).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A combination of options is not supported.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qot
