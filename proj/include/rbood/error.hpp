#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbood {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed rule text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A rule could not be evaluated on a sample (missing or non-numeric feature).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Input data is unusable: too few rows, malformed CSV, mismatched lengths.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Baselines were built for a different ruleset or configuration.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace rbood
