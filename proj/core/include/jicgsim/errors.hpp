#pragma once

#include <stdexcept>
#include <string>

namespace jicgsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when no threshold satisfies the calibration constraint set.
// constraint() names the first violated constraint (e.g. "C1").
class CalibrationFailure : public Error {
 public:
  CalibrationFailure(std::string constraint, const std::string& what)
      : Error(what), constraint_(std::move(constraint)) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

}  // namespace jicgsim
