#pragma once
// Imaging problem: vertical rays from (x, 0) must reach (Tx, a) after one
// refraction at the graph of ρ. With z = a − ρ the lower face solves
//   Dz = V(x, z) = φ̃(|S/z|²)·S/z,   φ̃(y) = κ₁/(κ₁ − sqrt(y + 1)),
// on a > z > |S|/sqrt(κ₁² − 1).

#include <optional>
#include <string>

#include "hybridlens/grid.hpp"
#include "hybridlens/maps.hpp"
#include "hybridlens/report.hpp"
#include "hybridlens/snell.hpp"

namespace hybridlens {

/// φ̃(y) = κ₁/(κ₁ − sqrt(y + 1)) on [0, κ₁² − 1). Not the metasurface phase.
class VarphiProfile {
 public:
  explicit VarphiProfile(double kappa1);

  double kappa1() const { return kappa_; }
  /// Right end of the domain, κ₁² − 1 (excluded).
  double y_max() const { return kappa_ * kappa_ - 1.0; }
  /// Throws DomainViolation outside [0, κ₁² − 1).
  double operator()(double y) const;
  /// φ̃′(y) = φ̃(y)²/(2κ₁ sqrt(y + 1)).
  double derivative(double y) const;

 private:
  void require_domain(double y) const;
  double kappa_;
};

/// a > |S(x)|/sqrt(κ₁² − 1) at every active node (id thickness); value is
/// the worst margin a − |S|/sqrt(κ₁² − 1).
ConditionReport thickness_check(const TargetMap& map, const OpticalConstants& constants, const Grid2D& grid);

/// V(x, z) given the displacement s = S(x). Throws FeasibilityViolation
/// unless z > |s|/sqrt(κ₁² − 1) (the denominator then stays positive).
Vec2 rhs_V(const Vec2& s, double z, double kappa1);
/// Same, evaluating S at x. FeasibilityViolation carries x.
Vec2 rhs_V(const Vec2& x, double z, const TargetMap& map, double kappa1);

struct SolveOptions {
  int substeps{1};                   ///< RK4 steps per grid segment
  double feasibility_slack{1e-9};    ///< relative slack in a > z > |S|/sqrt(κ₁²−1)
  std::optional<double> path_tol;    ///< default 100·h⁴, h the RK4 step
  bool check_paths{true};            ///< also integrate x₂-first and compare
};

struct LensDesign {
  Grid2D grid;
  OpticalConstants constants;
  TargetMap map = TargetMap::identity();
  Vec2 x0;
  double z0{};
  ScalarGrid rho;
  ScalarGrid z;
  VectorGrid drho;
  GridField<Mat2> d2rho;       ///< from the PDE: ρ_ij = −∂_jV_i − V_j ∂_zV_i
  double rk_step{};
  double path_residual{};      ///< max |z(x₁-first) − z(x₂-first)|
  double path_tol{};
};

/// Midpoint of (|S(x0)|/sqrt(κ₁² − 1), a).
double default_z0(const TargetMap& map, const OpticalConstants& constants, const Vec2& x0);

/// RK4 along axis-aligned staircases from x0 with z(x0) = z0 (default_z0
/// when omitted). Throws FeasibilityViolation at the first infeasible node
/// and PathInconsistency when the two integration orders disagree by more
/// than path_tol.
LensDesign solve_rho(const TargetMap& map, const OpticalConstants& constants, const Grid2D& grid, const Vec2& x0,
                     std::optional<double> z0 = std::nullopt, const SolveOptions& options = {});

/// D²ρ at a point from S, DS and z in closed form.
Mat2 hessian_closed_form(const Vec2& s, const Mat2& ds, double z, double kappa1);
/// D²ρ at x0 of a design; x0 must be the basepoint or a grid node.
Mat2 hessian_closed_form(const LensDesign& design, const Vec2& x0);
/// D²ρ from the chain rule on Dρ = −V(x, z(x)), without the factoring.
Mat2 hessian_from_pde(const Vec2& s, const Mat2& ds, double z, double kappa1);

/// 𝒜 = (I + (2/z²)(φ̃′/φ̃) S⊗S)(I + DS).
Mat2 matA_closed_form(const Vec2& s, const Mat2& ds, double z, double kappa1);
Mat2 matA_closed_form(const LensDesign& design, const Vec2& x0);
/// 𝒜 = I + ((κ₁²−1)/κ₁²) Dρ⊗Dρ + ((1−κ₁²)(a−ρ)/(κ₁²+Δ)) D²ρ with
/// Δ = sqrt(κ₁² + (κ₁²−1)|Dρ|²).
Mat2 matA_direct(const Vec2& drho, const Mat2& d2rho, double rho, double a, double kappa1);
/// Direct assembly at x0 from Dρ = −V and the chain-rule Hessian.
Mat2 matA_direct(const LensDesign& design, const Vec2& x0);

/// Δ from Dρ, and the closed form (κ₁²|(S,z)| − κ₁z)/(κ₁z − |(S,z)|).
double delta_from_gradient(const Vec2& drho, double kappa1);
double delta_closed_form(const Vec2& s, double z, double kappa1);

struct LemmaResidual {
  double absolute{};  ///< Frobenius norm of the difference
  double relative{};  ///< absolute / max(1, ‖left-hand side‖)
};

/// I + ((κ₁²−1)/κ₁²)φ̃²(y⊗y) − (I + φ̃(y⊗y))(I + 2(φ̃′/φ̃)(y⊗y)) at |y|².
LemmaResidual lemma_identity_check(const Vec2& y, double kappa1);

/// det(I + DS) ≠ 0 and invertibility of D²ρ(x0): case (1) det DS ≠ 0 when
/// S(x0) = 0, case (2) ζ ≠ (|S|²/z0²)φ̃ and ζ⊥ ≠ 0 otherwise. A quantity
/// counts as nonzero when it exceeds kNonzeroRelTol times its natural scale.
ConditionReport existence_verdict(const LensDesign& design, const Vec2& x0);
/// The same verdict from point data.
ConditionReport existence_verdict(const TargetMap& map, const OpticalConstants& constants, const Vec2& x0, double z0,
                                  double tol_fixed = 1e-10);

inline constexpr double kNonzeroRelTol = 1e-6;

}  // namespace hybridlens
