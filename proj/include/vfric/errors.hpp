#pragma once

#include <stdexcept>
#include <string>

namespace vfric {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the physical or projected domain, or a nonpositive eps.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidProfileError : public Error {
 public:
  using Error::Error;
};

// Value outside the range of a monotone map being inverted.
class RangeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedSchemeError : public Error {
 public:
  using Error::Error;
};

// A path failed to exit within the hard step cap.
class RunawayError : public Error {
 public:
  using Error::Error;
};

class DegenerateIntervalError : public Error {
 public:
  using Error::Error;
};

class AccuracyError : public Error {
 public:
  using Error::Error;
};

class InconsistentDataError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfric
