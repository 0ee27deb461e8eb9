#pragma once

#include <stdexcept>
#include <string>

namespace mmot {

// Base class for all toolkit errors. The C API maps each subclass to a
// distinct status code (see mmot/mmot.h).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed inputs: bad indices, shape mismatches, invalid weights or masses.
class InvalidInput : public Error {
public:
  using Error::Error;
};

// Product support exceeds the configured enumeration cap.
class TooLarge : public Error {
public:
  using Error::Error;
};

// The LP solver stalled, lost its basis, or produced an invalid certificate.
class SolverFailure : public Error {
public:
  using Error::Error;
};

// First-variable gradient not defined for the oracle/support combination.
class GradientUnavailable : public Error {
public:
  using Error::Error;
};

// A potential tuple failed dual feasibility where feasibility was required.
class CertificateInvalid : public Error {
public:
  using Error::Error;
};

// Scenario files: parse errors, bad stage lists, generator misuse.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem problems while reading scenarios or writing reports.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace mmot
