#pragma once

#include <stdexcept>
#include <string>

namespace flann {

// Base for every error raised by this library. Subclasses let callers (the
// CLI in particular) map failures to distinct exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise out-of-contract argument.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Data that cannot define a normalizer (all-zero voltages or displacements).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Value outside the representable range of a number format.
class RangeError : public Error {
 public:
  using Error::Error;
};

// LMS recurrence produced a non-finite cost.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class LookupMissError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flann
