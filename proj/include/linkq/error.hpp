#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace linkq {

/// Process exit codes used by the `linkq` tool.
enum class ExitCode : int { ok = 0, config = 1, data = 2, internal = 3 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::internal; }
};

/// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

/// Anything wrong with input data: malformed files, out-of-range values, I/O.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

/// A value outside the mathematical domain of an operation (e.g. PRR > 1).
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace linkq
