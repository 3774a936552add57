#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hitpredict {

// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violated a documented domain bound (popularity, feature range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file or payload does not have the expected shape. `line` is 1-based, 0
// when the error is not tied to a line.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training cannot proceed with the supplied data (single class, empty, ...).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Spotify-side errors.
class CredentialError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts = 0)
      : Error(attempts == 0 ? what
                            : what + " (after " + std::to_string(attempts) +
                                  " attempts)"),
        attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class UnknownPlaylistError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace hitpredict
