#pragma once

#include <stdexcept>
#include <string>

namespace fdgm {

// Base of every error thrown by the library. The CLI maps subclasses to
// exit codes (see tools/fdgm_cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A configuration that is well-formed but violates an algorithmic
// precondition (step size outside the admissible interval, rule/weights
// mismatch, constrained instance handed to DIGing, ...).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InfeasibleWindow : public Error {
 public:
  using Error::Error;
};

class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

class CertificationUnavailable : public Error {
 public:
  using Error::Error;
};

class OracleFailure : public Error {
 public:
  OracleFailure(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace fdgm
