#pragma once

#include <stdexcept>
#include <string>

namespace amptcr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Binary archive layout problems (bad magic, header, member sizes).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Archive members disagree with each other (shape or count mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A numeric routine failed (non-convergence, NaN, singular system).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace amptcr
