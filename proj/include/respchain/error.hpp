#pragma once

#include <stdexcept>
#include <string>

namespace respchain {

/// Error categories. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  validation = 1,
  structural = 2,
  io = 3,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::validation:
    return "validation";
  case ErrorKind::structural:
    return "structural";
  case ErrorKind::io:
    return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Bad input: out-of-range states, malformed parameters, shape mismatches.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string &what)
      : Error(ErrorKind::validation, what) {}
};

/// The chain lacks a property an operation needs (defined rows,
/// irreducibility, aperiodicity).
class StructuralError : public Error {
public:
  explicit StructuralError(const std::string &what)
      : Error(ErrorKind::structural, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error(ErrorKind::io, what) {}
};

} // namespace respchain
