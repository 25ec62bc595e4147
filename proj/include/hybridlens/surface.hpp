#pragma once
// Smooth scalar surfaces over the source plane with value, gradient and
// Hessian. The same type carries two readings:
//   - a height graph u ↦ (u, g(u)), which is what the ray tracer intersects;
//   - the path length ρ(x) = |P(x) − (x, 0)| along e(x), which is what the
//     far-field formulas differentiate.
// For the vertical field the two coincide.

#include <functional>
#include <map>
#include <string>
#include <utility>

#include "hybridlens/fields.hpp"
#include "hybridlens/geometry.hpp"

namespace hybridlens {

struct LensDesign;

struct SurfaceJet {
  double value{};
  Vec2 grad;
  Mat2 hess;
};

/// Bivariate polynomial Σ c_pq x₁^p x₂^q.
struct Poly2 {
  std::map<std::pair<int, int>, double> coeffs;

  double operator()(const Vec2& x) const;
  SurfaceJet jet(const Vec2& x) const;
  int degree() const;
};

class Surface {
 public:
  using JetFn = std::function<SurfaceJet(const Vec2&)>;

  /// analytic marks whether the Hessian is exact (not finite differences).
  Surface(std::string name, JetFn jet, Box2 domain = Box2::plane(), bool analytic = true);

  /// Only values; gradient and Hessian by central differences.
  static Surface from_function(std::string name, ScalarFn2 f, Box2 domain = Box2::plane());
  static Surface flat(double r0);
  /// r0 + slope·x.
  static Surface plane(double r0, const Vec2& slope);
  /// r0 + g·x + ½ xᵀHx (H symmetrized).
  static Surface quadratic(double r0, const Vec2& g, const Mat2& H);
  static Surface polynomial(Poly2 p, std::string name = "polynomial");
  /// Bicubic Hermite patches through ρ, Dρ and ρ₁₂ at the design nodes.
  /// Only cells whose four corners are active are covered; elsewhere jet()
  /// throws DomainViolation.
  static Surface from_design(const LensDesign& design);

  const std::string& name() const { return name_; }
  const Box2& domain() const { return domain_; }
  bool analytic() const { return analytic_; }

  SurfaceJet jet(const Vec2& x) const { return jet_(x); }
  double value(const Vec2& x) const { return jet_(x).value; }
  Vec2 gradient(const Vec2& x) const { return jet_(x).grad; }
  Mat2 hessian(const Vec2& x) const { return jet_(x).hess; }

 private:
  std::string name_;
  JetFn jet_;
  Box2 domain_;
  bool analytic_;
};

/// Distance t > 0 along e(x) from (x, 0) to the graph of `graph`, the root
/// of t·e₃ − g(x + t·e′) on [0, t_max]. Throws MissedSurface when no sign
/// change is bracketed.
double ray_graph_distance(const Surface& graph, const Vec2& x, const Vec3& e, double t_max, double tol);

/// The path-length surface ρ of a height graph g under field e. Values by
/// root finding in [0, a/e₃], gradient by implicit differentiation,
/// Hessian by central differences of the gradient (step 1e-4).
Surface path_length_surface(const Surface& graph, const IncidentField& field, double a);

}  // namespace hybridlens
