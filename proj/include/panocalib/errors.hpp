#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panocalib {

enum class ErrorClass {
  InvalidArgument,
  PoleSingularity,
  BranchDomain,
  AllPointsRejected,
  DataError,
  IoError,
  NumericalFailure,
};

std::string_view to_string(ErrorClass cls);

// Base of every exception thrown by the library. The class tag is what the
// CLI prints and maps to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& message)
      : std::runtime_error(message), class_(cls) {}

  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorClass::InvalidArgument, message) {}
};

// Projection requested for a point on (or numerically at) the camera's
// vertical axis, where the azimuth is undefined.
class PoleSingularity : public Error {
 public:
  explicit PoleSingularity(const std::string& message)
      : Error(ErrorClass::PoleSingularity, message) {}
};

// Point outside the domain where the arctan form of the imaging model agrees
// with atan2 (x <= 0, or z <= 0 for the squared variant).
class BranchDomain : public Error {
 public:
  explicit BranchDomain(const std::string& message)
      : Error(ErrorClass::BranchDomain, message) {}
};

class AllPointsRejected : public Error {
 public:
  explicit AllPointsRejected(const std::string& message)
      : Error(ErrorClass::AllPointsRejected, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorClass::DataError, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorClass::IoError, message) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message)
      : Error(ErrorClass::NumericalFailure, message) {}
};

}  // namespace panocalib
