#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddfem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested (dimension, order) pair or rule is not supported.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// One of the standing modelling assumptions does not hold:
///  1 positive conductivity, 2 positive Jacobian determinant,
///  3 positive quadrature weights, 4 quadrature exact to degree 2p-2.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(int assumption, const std::string& what)
      : Error("assumption " + std::to_string(assumption) + " violated: " + what),
        assumption_(assumption) {}
  int assumption() const noexcept { return assumption_; }

 private:
  int assumption_;
};

/// Text input could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally inconsistent mesh (dangling index, repeated node in an element, ...).
class InvalidMesh : public Error {
 public:
  using Error::Error;
};

/// N(B) is not contained in N(A), so the support number sigma(A, B) is unbounded.
class InfiniteSupport : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be nonsingular is not.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A computed quantity contradicts a proven inequality or identity.
class VerificationFailure : public Error {
 public:
  using Error::Error;
};

/// A dense check was requested on a problem larger than the configured limit.
class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace ddfem
