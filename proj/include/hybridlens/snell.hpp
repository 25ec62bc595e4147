#pragma once
// Vector refraction at conventional interfaces and at metasurfaces.
//
// Standard law:     x − κ m = λ ν
// Metasurface law:  x − ∇φ/k − κ m = μ ν
// ν is the unit normal pointing into the outgoing medium, κ = n_out / n_in.

#include "hybridlens/geometry.hpp"

namespace hybridlens {

struct OpticalConstants {
  double n1{1.0};  ///< medium I, below the lens
  double n2{1.5};  ///< medium II, inside the lens
  double n3{1.0};  ///< medium III, above the metasurface
  double k{1.0};   ///< wavenumber in medium II (1/length)
  double a{1.0};   ///< metasurface plane height
  double c{2.0};   ///< target plane height

  double kappa1() const { return n2 / n1; }
  double kappa2() const { return n3 / n2; }

  /// Positive indices and wavenumber; throws InvalidArgument.
  void validate() const;
  /// validate() plus κ₁ > 1 and c > a > 0, as required by the lens problems.
  void validate_lens() const;
};

struct RefractionResult {
  UnitVec3 m;
  double multiplier;  ///< λ for standard refraction, μ for metasurfaces
};

/// Discriminants in [−kDiscriminantTolerance, 0) are treated as grazing
/// refraction and clamped to 0.
inline constexpr double kDiscriminantTolerance = 1e-12;

/// Throws InvalidIncidence when x·ν < 0 and TotalInternalReflection when
/// κ < 1 and x·ν < sqrt(1 − κ²).
RefractionResult refract_standard(const UnitVec3& x, const UnitVec3& nu, double kappa);

/// General μ formula; when ∇φ·ν = 0 the tangential form with x·ν is used.
/// Throws InvalidIncidence when (x − ∇φ/k)·ν < 0 and
/// MetaTotalInternalReflection when [(x − ∇φ/k)·ν]² < |x − ∇φ/k|² − κ².
RefractionResult refract_metasurface(const UnitVec3& x, const UnitVec3& nu, double kappa, const Vec3& grad_phi,
                                     double k);

/// Lower bound of x·m over all refractions with ratio κ: 1/κ for κ > 1 and
/// κ for κ < 1.
double deviation_lower_bound(double kappa);

}  // namespace hybridlens
