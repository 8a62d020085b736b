#pragma once

#include <stdexcept>
#include <string>

namespace alab {

// A precondition on the inputs of an operation was violated.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid experiment or parameter configuration (bad constant, bad grid).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A problem size exceeded a configured memory or dimension budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method failed to converge or a residual certificate failed.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

// The requested energy lies on the spectrum (within tolerance), so the
// resolvent is undefined there.
class SpectralCollision : public NumericError {
 public:
  SpectralCollision(const std::string& what, double energy, double distance)
      : NumericError(what, distance), energy_(energy), distance_(distance) {}

  double energy() const noexcept { return energy_; }
  double distance() const noexcept { return distance_; }

 private:
  double energy_;
  double distance_;
};

}  // namespace alab
