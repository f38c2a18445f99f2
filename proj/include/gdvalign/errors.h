#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gdvalign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (edge lists, GDV files, similarity files, CSV).
// line() is 1-based; 0 when the error is not tied to a line.
class FormatError : public Error {
 public:
  FormatError(const std::string &what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Out-of-range or inconsistent arguments to an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration (missing files, bad schema).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// PCA on data with zero total variance.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gdvalign
