#pragma once

#include <stdexcept>
#include <string>

namespace qgbench {

// Base of every error raised by the library. Callers that only need to
// report a failure can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, missing credentials, bad arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Network failure or retryable HTTP status that survived every attempt.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Response body that is not JSON or lacks choices[0].message.content.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Model output that does not follow the requested format. `raw()` keeps the
// offending text for the failure log.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class GenerationParseError : public ParseError {
 public:
  using ParseError::ParseError;
};

class ClassificationParseError : public ParseError {
 public:
  using ParseError::ParseError;
};

class CoverageParseError : public ParseError {
 public:
  using ParseError::ParseError;
};

class RatingParseError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyAnswerError : public Error {
 public:
  using Error::Error;
};

class ImportError : public Error {
 public:
  ImportError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Cross-file reference that points nowhere (e.g. a rating for an unknown
// question id).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was asked to run before the stage it depends on.
class DependencyError : public Error {
 public:
  DependencyError(const std::string& what, std::string missing_stage)
      : Error(what), missing_stage_(std::move(missing_stage)) {}
  const std::string& missing_stage() const noexcept { return missing_stage_; }

 private:
  std::string missing_stage_;
};

}  // namespace qgbench
