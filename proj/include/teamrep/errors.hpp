#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teamrep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A node or skill id that does not resolve.
class ReferenceError : public Error {
 public:
  ReferenceError(const std::string& what, std::string id)
      : Error(what + ": '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Input parsed but violates a data invariant (negative weight, missing rows, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A cache or factor set was used with an instance it was not built for.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Singular system, spectral guard violation or eigensolver failure.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace teamrep
