#pragma once

#include <stdexcept>
#include <string>

namespace lanekin {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGridError : public Error {
 public:
  using Error::Error;
};

class LaneIndexError : public Error {
 public:
  using Error::Error;
};

class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

/// A table row whose raw sum vanishes cannot be renormalized.
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

/// A table entry evaluated to a negative probability.
class ModelViolationError : public Error {
 public:
  ModelViolationError(const std::string& what, std::string equation)
      : Error(what), equation_(std::move(equation)) {}
  const std::string& equation() const noexcept { return equation_; }

 private:
  std::string equation_;
};

/// Base class of failures raised while time-stepping.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long step)
      : NumericalError(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class PositivityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedOrderError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario configuration. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace lanekin
