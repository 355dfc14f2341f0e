#pragma once

#include <stdexcept>
#include <string>

namespace glidernav {

/// Base of every error raised by the navigation core.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input: coordinate tokens, file headers, log records.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Flow queried outside the declared space-time domain of a source.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent mission configuration. `key` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Transport-level failure talking to a dockserver (retryable).
class ConnectionError : public Error {
 public:
  using Error::Error;
};

/// Dockserver rejected the session token (not retryable).
class AuthError : public ConnectionError {
 public:
  using ConnectionError::ConnectionError;
};

/// Protocol violation or server-side error reply.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Surfacing event too old to plan from.
class StaleEventError : public Error {
 public:
  using Error::Error;
};

}  // namespace glidernav
