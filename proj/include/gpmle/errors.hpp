#pragma once

#include <stdexcept>
#include <string>

namespace gpmle {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated (dimension mismatch, invalid
/// parameter, malformed input).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class AllJitterFailed : public Error {
 public:
  using Error::Error;
};

class DegenerateLogDet : public Error {
 public:
  using Error::Error;
};

class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

class NonPositiveParam : public Error {
 public:
  using Error::Error;
};

class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

class InitFailed : public Error {
 public:
  using Error::Error;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

/// A user-supplied function returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class FitFailed : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class ConstantData : public Error {
 public:
  using Error::Error;
};

class MissingReference : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Closed form not transcribed yet (registered but unavailable test function).
class NotAvailable : public Error {
 public:
  using Error::Error;
};

}  // namespace gpmle
