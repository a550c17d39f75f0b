#pragma once

#include <stdexcept>
#include <string>

namespace rtm {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: violated precondition, malformed file, inconsistent config.
/// The CLI maps it to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The numerics could not produce an answer (no root, packet escaped the
/// grid, insufficient signal). The CLI maps it to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public ValidationError {
 public:
  explicit UnsupportedOrder(int order)
      : ValidationError("recurrence order j=" + std::to_string(order) +
                        " is not supported (j in {1, 2, 3})"),
        order_(order) {}
  int order() const noexcept { return order_; }

 private:
  int order_;
};

class InsufficientSignal : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A vanishing denominator in the modulated revival time, or r = 1.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rtm
