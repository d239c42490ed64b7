#pragma once

#include <stdexcept>
#include <string>

namespace prospect {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (JSON syntax, CSV quoting).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that does not have the expected shape.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The embedding service could not be reached or answered with a non-200 status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The embedding service answered with something that violates the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A loaded artifact breaks a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// A topic-model fitting stage failed; what() names the stage.
class FitError : public Error {
 public:
  FitError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace prospect
