#pragma once

#include <stdexcept>
#include <string>

namespace brdfnqm {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map runtime failures to one exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedResolutionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientCandidatesError : public Error {
 public:
  using Error::Error;
};

class PairingError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class CorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace brdfnqm
