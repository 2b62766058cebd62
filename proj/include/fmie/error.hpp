#pragma once

#include <stdexcept>
#include <string>

namespace fmie {

/// Bad parameters, inconsistent initial states, disconnected geometries.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is well-formed but exceeds an exact algorithm's size limit.
class UnsupportedSize : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (eigensolver, non-convergence, singular system).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace fmie
