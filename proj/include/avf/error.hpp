#pragma once

#include <stdexcept>
#include <string>

namespace avf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A file does not match its binary or text format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value outside the accepted domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration text could not be parsed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace avf
