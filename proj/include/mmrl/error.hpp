#pragma once

#include <stdexcept>
#include <string>

namespace mmrl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed instance, bad config, unreadable file.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a linear solve leaves a residual above 1e-6.
class SingularSystem : public Error {
 public:
  explicit SingularSystem(double residual)
      : Error("linear system residual " + std::to_string(residual) + " exceeds 1e-6"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class MaxIterExceeded : public Error {
 public:
  explicit MaxIterExceeded(double residual)
      : Error("iteration budget exhausted with residual " + std::to_string(residual)),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class DegeneratePolicy : public Error {
 public:
  using Error::Error;
};

class DegenerateWeight : public Error {
 public:
  using Error::Error;
};

class EpsilonOutOfRange : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class UnreliableReference : public Error {
 public:
  using Error::Error;
};

/// The equilibrium oracle's two independent routes disagree.
class OracleDisagreement : public Error {
 public:
  using Error::Error;
};

}  // namespace mmrl
