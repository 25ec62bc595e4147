#pragma once

#include <stdexcept>
#include <string>

namespace hybridlens {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HYBRIDLENS_ERROR(Name)      \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  }

HYBRIDLENS_ERROR(InvalidArgument);
HYBRIDLENS_ERROR(DomainViolation);
HYBRIDLENS_ERROR(SingularMatrix);

// Refraction.
HYBRIDLENS_ERROR(InvalidIncidence);
HYBRIDLENS_ERROR(TotalInternalReflection);
HYBRIDLENS_ERROR(MetaTotalInternalReflection);

// Fields and maps.
HYBRIDLENS_ERROR(NotIntegrable);
HYBRIDLENS_ERROR(NotEigenvector);

// Solvers.
HYBRIDLENS_ERROR(PathInconsistency);
HYBRIDLENS_ERROR(QuadratureFailure);
HYBRIDLENS_ERROR(DerivativeUnavailable);
HYBRIDLENS_ERROR(SingularHessian);
HYBRIDLENS_ERROR(NonPositiveDepth);
HYBRIDLENS_ERROR(NonInjectiveFootprint);

// Tracing.
HYBRIDLENS_ERROR(MissedSurface);

// Files and configuration.
HYBRIDLENS_ERROR(IoError);
HYBRIDLENS_ERROR(ConfigError);

#undef HYBRIDLENS_ERROR

/// A point where the imaging inequality a > z > |S|/sqrt(κ₁²−1) fails.
class FeasibilityViolation : public Error {
 public:
  FeasibilityViolation(const std::string& what, double where_x, double where_y)
      : Error(what), x_(where_x), y_(where_y) {}
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

}  // namespace hybridlens
