#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mkropina {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A derivative of higher total order than the jet carries was requested.
class OrderExceededError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an elementary function, or a point outside
// the conic domain of a Finsler function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, double determinant)
      : Error(what), determinant_(determinant) {}
  double determinant() const noexcept { return determinant_; }

 private:
  double determinant_;
};

// An operation was invoked on an input that does not satisfy its
// precondition (e.g. metrizing a non-metrizable geometry).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, SourceSpan span)
      : Error(what + " at [" + std::to_string(span.start) + ", " + std::to_string(span.end) + ")"),
        span_(span),
        message_(what) {}
  SourceSpan span() const noexcept { return span_; }
  const std::string& message() const noexcept { return message_; }

 private:
  SourceSpan span_;
  std::string message_;
};

}  // namespace mkropina
