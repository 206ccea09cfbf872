#pragma once

#include <stdexcept>
#include <string>

namespace csqpt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coherent state (or other generator) does not fit in the requested Fock truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by its arguments.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A matrix or tensor fails the invariants of its type.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class EdgeOrderError : public Error {
 public:
  using Error::Error;
};

class InsufficientProbes : public Error {
 public:
  using Error::Error;
};

class DegenerateBlock : public Error {
 public:
  using Error::Error;
};

/// No tensor element of the requested block passed the magnitude floor.
class EmptyMap : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the offending line (1-based, 0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace csqpt
