#pragma once

#include <stdexcept>
#include <string>

namespace vvclab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Line set is not a tree rooted at the slack bus.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Something references a bus (or device) that does not exist.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

class InvalidDeviceError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// The dispatch oracle found no candidate with a converged power flow.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Runs being aggregated do not cover the same days.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace vvclab
