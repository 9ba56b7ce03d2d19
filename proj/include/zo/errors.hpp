// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace zo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidSmoothingParameter : public Error {
 public:
  using Error::Error;
};

/// A loss evaluation returned NaN/Inf. Carries the point that produced it.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(const std::string& what, Eigen::VectorXd point, double value)
      : Error(what), point_(std::move(point)), value_(value) {}

  const Eigen::VectorXd& point() const { return point_; }
  double value() const { return value_; }

 private:
  Eigen::VectorXd point_;
  double value_;
};

/// Invalid configuration; `field()` names the offending key when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedObjective : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleParameter : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace zo
