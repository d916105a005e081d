#pragma once

#include <stdexcept>
#include <string>

namespace affect {

// Root of every library exception. The CLI maps ConfigError to a usage
// failure and everything else to a data failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated container / file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed container whose encoding is not supported.
class UnsupportedCodecError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input dimensions do not match what a component declared.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Degenerate or otherwise unusable data.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace affect
