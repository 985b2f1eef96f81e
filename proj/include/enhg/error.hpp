#pragma once

#include <stdexcept>
#include <string>

namespace enhg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files (CSV, IDX).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a valid result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace enhg
