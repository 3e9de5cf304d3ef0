#pragma once

#include <stdexcept>
#include <string>

namespace lgp {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (validation 1, runtime/data 2, remote 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Zero-norm vectors and similar inputs where a quantity is undefined.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class LookupMiss : public Error {
 public:
  using Error::Error;
};

class RemoteError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgp
