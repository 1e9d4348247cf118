#pragma once

#include <stdexcept>
#include <string>

namespace lassogeom {

/// Bad argument (negative λ, k out of range, dimension mismatch, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter lies outside the range where a formula is valid.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// √δ ≥ √(m−1): the regularized bound carries no information at this λ.
class BoundVacuous : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An inner numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, double objective, double residual, long iterations)
      : NumericalError(what), objective_(objective), residual_(residual), iterations_(iterations) {}

  double objective() const noexcept { return objective_; }
  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double objective_;
  double residual_;
  long iterations_;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace detail
}  // namespace lassogeom
