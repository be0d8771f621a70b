#pragma once

#include <stdexcept>
#include <string>

namespace glow {

// Root of every error the library raises. Callers that only need to report
// a failure can catch this; the subclasses carry the category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated on a pure computation (empty trajectory, bad n ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Configuration file / CLI values rejected. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Environment could not be started (missing game file, bridge not spawnable).
class EnvironmentUnavailable : public Error {
 public:
  using Error::Error;
};

// Environment contract misuse, e.g. stepping after done or a malformed
// bridge response.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A replayed action list ended early (done before the last action).
class ReplayDivergence : public Error {
 public:
  ReplayDivergence(std::size_t step_index, const std::string& what)
      : Error(what), step_index_(step_index) {}
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

// Replay reached a different state than recorded. Fatal for a run.
class NondeterminismError : public Error {
 public:
  NondeterminismError(std::size_t step_index, const std::string& what)
      : Error(what), step_index_(step_index) {}
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

// Model output could not be turned into the requested decision.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Backend failed after retries (or with a non-retryable status).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Retryable transport failure (connection reset, 5xx, 429).
class TransientBackendError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace glow
