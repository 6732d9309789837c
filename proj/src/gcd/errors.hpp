#pragma once

#include <stdexcept>
#include <string>

namespace gcd {

/// A state outside the feasible region (a quantity that enters a fractional
/// power is not strictly positive). Carries the offending variable name.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string variable, const std::string& what)
      : std::runtime_error(what), variable_(std::move(variable)) {}
  const std::string& variable() const noexcept { return variable_; }

 private:
  std::string variable_;
};

/// The multiplier system is singular or too badly conditioned to trust.
class ConstraintDegeneracy : public std::runtime_error {
 public:
  ConstraintDegeneracy(double condition, const std::string& what)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Structural defect in a model definition (bad indices, non-affine
/// constraint, negative power factor).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter or configuration value; `key` names the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Iterative solver failed (Newton divergence, step-size underflow).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gcd
