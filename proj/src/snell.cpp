#include "hybridlens/snell.hpp"

#include <string>

#include "hybridlens/errors.hpp"

namespace hybridlens {

void OpticalConstants::validate() const {
  if (!(n1 > 0.0) || !(n2 > 0.0) || !(n3 > 0.0)) throw InvalidArgument("refractive indices must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("wavenumber k must be positive");
}

void OpticalConstants::validate_lens() const {
  validate();
  if (!(kappa1() > 1.0)) throw InvalidArgument("lens problems need n2 > n1 (kappa1 > 1)");
  if (!(a > 0.0)) throw InvalidArgument("metasurface height a must be positive");
  if (!(c > a)) throw InvalidArgument("target height c must exceed a");
}

namespace {

// Both multipliers have the form s − sqrt(disc); the product form
// (s² − disc)/(s + sqrt(disc)) avoids cancellation when s ≈ sqrt(disc).
double stable_root_difference(double s, double disc, double numerator) {
  const double r = std::sqrt(disc);
  const double denom = s + r;
  return denom > 0.0 ? numerator / denom : s - r;
}

}  // namespace

RefractionResult refract_standard(const UnitVec3& x, const UnitVec3& nu, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("refract_standard: kappa must be positive");
  const double s = dot(x.vec(), nu.vec());
  if (s < 0.0) throw InvalidIncidence("refract_standard: x·nu < 0; orient nu toward the outgoing medium");
  double disc = kappa * kappa - 1.0 + s * s;
  if (disc < -kDiscriminantTolerance) {
    throw TotalInternalReflection("refract_standard: x·nu = " + std::to_string(s) + " < sqrt(1 - kappa^2)");
  }
  disc = std::max(disc, 0.0);
  const double lambda = stable_root_difference(s, disc, 1.0 - kappa * kappa);
  const Vec3 m = (x.vec() - nu.vec() * lambda) / kappa;
  return {UnitVec3(m), lambda};
}

RefractionResult refract_metasurface(const UnitVec3& x, const UnitVec3& nu, double kappa, const Vec3& grad_phi,
                                     double k) {
  if (!(kappa > 0.0)) throw InvalidArgument("refract_metasurface: kappa must be positive");
  if (!(k > 0.0)) throw InvalidArgument("refract_metasurface: wavenumber must be positive");
  const Vec3 y = x.vec() - grad_phi / k;
  // Tangential phase: ∇φ·ν = 0 so the incidence term is x·ν itself.
  const bool tangential = dot(grad_phi, nu.vec()) == 0.0;
  const double s = tangential ? dot(x.vec(), nu.vec()) : dot(y, nu.vec());
  if (s < 0.0) throw InvalidIncidence("refract_metasurface: (x - grad(phi)/k)·nu < 0");
  // y = x is a unit vector when the phase is flat.
  const double y2 = grad_phi == Vec3{} ? 1.0 : norm2(y);
  double disc = kappa * kappa - y2 + s * s;
  if (disc < -kDiscriminantTolerance) {
    throw MetaTotalInternalReflection("refract_metasurface: [(x - grad(phi)/k)·nu]^2 < |x - grad(phi)/k|^2 - kappa^2");
  }
  disc = std::max(disc, 0.0);
  const double mu = stable_root_difference(s, disc, y2 - kappa * kappa);
  const Vec3 m = (y - nu.vec() * mu) / kappa;
  return {UnitVec3(m), mu};
}

double deviation_lower_bound(double kappa) {
  if (!(kappa > 0.0) || kappa == 1.0) throw InvalidArgument("deviation_lower_bound: kappa must be positive and != 1");
  return kappa > 1.0 ? 1.0 / kappa : kappa;
}

}  // namespace hybridlens
