#pragma once

#include <stdexcept>
#include <string>

namespace issgf {

/// Bad shapes, out-of-range parameters, malformed inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel (SVD, eigensolver) failed to converge.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regression data that cannot determine a unique least-squares solution.
class DegenerateData : public std::runtime_error {
 public:
  DegenerateData(const std::string& what, int rank)
      : std::runtime_error(what), rank_(rank) {}
  int rank() const { return rank_; }

 private:
  int rank_;
};

/// An operation's documented precondition does not hold for its input.
class PreconditionViolated : public std::runtime_error {
 public:
  PreconditionViolated(const std::string& what, double value)
      : std::runtime_error(what), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

/// Configurations an analytic result does not cover (e.g. n <= m at the
/// origin spectrum).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration; `field` names the offending entry when known.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& what, std::string field = "")
      : InvalidArgument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace issgf
