#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rgap {

using Vec3 = Eigen::Vector3d;

/// Number of species in the mixture. Species are indexed 0..3 in code and
/// correspond to S1..S4 of the reaction S1 + S2 <-> S3 + S4.
inline constexpr int kSpecies = 4;

/// Invalid argument to an operation (bad order, non-unit sigma, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation requested outside the operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Monte Carlo or quadrature failure (too many non-finite samples).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear algebra or time integration failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario or configuration rejected at validation. `field` names the
/// offending configuration entry or the violated constraint.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void check_species(int i, const char* what = "species index") {
  if (i < 0 || i >= kSpecies) {
    throw ParameterError(std::string(what) + " out of range 0..3: " + std::to_string(i));
  }
}

}  // namespace rgap
