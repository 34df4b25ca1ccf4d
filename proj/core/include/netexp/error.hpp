#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netexp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// An estimator arm (treated or control) has no usable units.
class DegenerateArmError : public Error {
 public:
  using Error::Error;
};

}  // namespace netexp
