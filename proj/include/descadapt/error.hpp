#pragma once

#include <stdexcept>
#include <string>

namespace descadapt {

/// Invalid input to an operation (duplicate ids, length mismatch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Filesystem or parse failure on one of the on-disk formats.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base for failures of an external text generator or teacher service.
class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-2xx status after all retries, or no connection at all (status 0).
class TransportError : public ServiceError {
 public:
  TransportError(const std::string& what, int status) : ServiceError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// The service answered but the body did not follow the wire contract.
class ProtocolError : public ServiceError {
 public:
  using ServiceError::ServiceError;
};

/// Mock mode has no canned response for a prompt hash.
class MockNotFoundError : public ServiceError {
 public:
  MockNotFoundError(const std::string& what, std::string hash)
      : ServiceError(what), hash_(std::move(hash)) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

/// Generation failed while understanding a description; carries the prompt hash.
class GenerationError : public ServiceError {
 public:
  GenerationError(const std::string& what, std::string prompt_hash)
      : ServiceError(what), prompt_hash_(std::move(prompt_hash)) {}
  const std::string& prompt_hash() const noexcept { return prompt_hash_; }

 private:
  std::string prompt_hash_;
};

}  // namespace descadapt
