#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stlgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A time or point lies outside the domain of a signal or grid.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid argument or configuration value.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A temporal window cannot be monitored on the available trace.
class HorizonError : public Error {
public:
  using Error::Error;
};

/// Linear algebra failure (e.g. a Gram matrix that stays indefinite).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Not enough training data to fit a model.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

/// The simulator under test failed to produce a trace.
class SimulationError : public Error {
public:
  using Error::Error;
};

/// The objective failed at a search point. The point is kept for reporting.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& message, std::vector<double> point)
      : Error(message), point_(std::move(point)) {}

  const std::vector<double>& point() const { return point_; }

private:
  std::vector<double> point_;
};

/// Malformed formula text. Carries a 1-based source position.
class ParseError : public Error {
public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

} // namespace stlgp
