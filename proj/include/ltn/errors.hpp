#pragma once

#include <stdexcept>
#include <string>

namespace ltn {

/// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-box states, bad parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An exhaustive procedure was asked to run above its configured size limit.
class LimitExceeded : public Error {
 public:
  LimitExceeded(const std::string& what, int n, int limit)
      : Error(what + ": dimension " + std::to_string(n) + " exceeds limit " +
              std::to_string(limit)),
        n_(n),
        limit_(limit) {}

  int dimension() const { return n_; }
  int limit() const { return limit_; }

 private:
  int n_;
  int limit_;
};

/// A matrix that must be inverted is (numerically) singular.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Non-degeneracy of the mode matrices I - Sigma_l W does not hold.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

/// range([W-- W-+]) is not contained in range(B-).
class RangeConditionError : public Error {
 public:
  using Error::Error;
};

/// Integration step larger than the stability bound or causing box escape.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Network file or CLI input could not be parsed. field() names the culprit.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& msg)
      : Error("field '" + field + "': " + msg), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace ltn
