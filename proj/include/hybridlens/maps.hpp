#pragma once
// Source→target maps T for the imaging problem, stored through the
// displacement S = T − I.

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "hybridlens/geometry.hpp"
#include "hybridlens/grid.hpp"
#include "hybridlens/report.hpp"

namespace hybridlens {

class TargetMap {
 public:
  using Displacement = std::function<Vec2(const Vec2&)>;
  using Jacobian = std::function<Mat2(const Vec2&)>;
  using Potential = std::function<double(const Vec2&)>;
  using Params = std::map<std::string, double>;

  /// From S directly; T(x) is evaluated as x + S(x).
  static TargetMap from_displacement(std::string name, Displacement s, std::optional<Jacobian> ds = std::nullopt,
                                     std::optional<Potential> potential = std::nullopt, Box2 domain = Box2::plane());
  /// From T; S(x) is evaluated as T(x) − x, and DS = DT − I when DT is given.
  static TargetMap from_transform(std::string name, Displacement t, std::optional<Jacobian> dt = std::nullopt,
                                  Box2 domain = Box2::plane());

  static TargetMap identity();
  /// T = (1 + α)x.
  static TargetMap dilation(double alpha);
  /// S = α(−x₂, x₁); fails both integrability conditions for α ≠ 0.
  static TargetMap rotation(double alpha);
  /// T = (h(x₁), x₂) with h(t) = c0 + c1 t + c2 t² + c3 t³.
  static TargetMap horizontal(double c0, double c1, double c2 = 0.0, double c3 = 0.0);
  /// S = (x − γ)/|x − γ|, the gradient of s = |x − γ|.
  static TargetMap eikonal_distance(const Vec2& gamma);

  const std::string& name() const { return name_; }
  /// Parameters of a built-in map; empty for callback maps.
  const Params& params() const { return params_; }
  const Box2& domain() const { return domain_; }

  Vec2 S(const Vec2& x) const { return s_(x); }
  Vec2 T(const Vec2& x) const;
  /// Row i holds ∇S_i, i.e. DS(i, j) = ∂S_i/∂x_j. Central differences when no
  /// analytic Jacobian was supplied.
  Mat2 DS(const Vec2& x) const;
  bool has_analytic_jacobian() const { return ds_.has_value(); }
  bool has_potential() const { return potential_.has_value(); }
  double potential(const Vec2& x) const;

 private:
  TargetMap() = default;

  std::string name_;
  Params params_;
  Displacement s_;
  std::optional<Displacement> t_;
  std::optional<Jacobian> ds_;
  std::optional<Potential> potential_;
  Box2 domain_;
};

/// D|S|² = 2·S·DS as a row vector.
Vec2 grad_norm2_S(const Vec2& s, const Mat2& ds);

/// max |∇×S| (id curl_S) and max |S×D|S|²| (id S_cross_DS2) over the active
/// nodes; each passes iff ≤ tol.
ConditionReport admissibility(const TargetMap& map, const Grid2D& grid, double tol);

struct EigenPair {
  double zeta{};       ///< Rayleigh quotient of DS along Sᵀ
  double zeta_perp{};  ///< Rayleigh quotient of DS along S⊥ᵀ
  Vec2 s;
  Mat2 ds;
  double residual{};   ///< max of |DS·Sᵀ − ζSᵀ|, |DS·S⊥ᵀ − ζ⊥S⊥ᵀ|
};

struct FixedPoint {
  Vec2 s;  ///< |s| ≤ tol_fixed
  Mat2 ds;
};

using EigenStructure = std::variant<EigenPair, FixedPoint>;

/// FixedPoint when |S(x)| ≤ tol_fixed, otherwise the two Rayleigh quotients.
/// NotEigenvector when the residual exceeds eig_tol·|S|.
EigenStructure eigen_structure(const TargetMap& map, const Vec2& x, double tol_fixed = 1e-10,
                               double eig_tol = 1e-8);

/// 1e-10 times the grid diameter.
double default_tol_fixed(const Grid2D& grid);

}  // namespace hybridlens
