#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace citegap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input record. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a corpus-level rule (duplicate ids, ...).
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Unknown paper or author id, or a failing gender provider lookup.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to a pure function.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Synthetic corpus configuration cannot be satisfied.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace citegap
