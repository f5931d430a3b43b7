#pragma once

#include <stdexcept>
#include <string>

namespace endorhythm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Statistically degenerate input (zero variance, constant groups).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed record in an input file. `record()` is the 1-based line
// (line-delimited formats) or record index (single-document formats).
class ParseError : public Error {
 public:
  ParseError(std::size_t record, const std::string& what)
      : Error("record " + std::to_string(record) + ": " + what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

// Well-formed record whose content violates an invariant (e.g. unknown gold label).
class ValidationError : public Error {
 public:
  ValidationError(std::size_t record, const std::string& what)
      : Error("record " + std::to_string(record) + ": " + what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

// Network-level failure or retryable HTTP status that survived all retries.
// `status()` is 0 when no HTTP response was received.
class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Response body that does not follow the expected wire format.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A mock provider was asked for more than its script provides.
class ScriptExhaustedError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

}  // namespace endorhythm
