#pragma once
// Far-field problem: rays e(x) from (x, 0) refract at P(x) = (x, 0) + ρe
// into m = (e − λν)/κ₁, travel d = (a − ρe₃)/m₃ to (Q(x), a), and leave the
// metasurface vertically when ∇φ(Q)/k = (m₁, m₂). ρ here is the path length
// along e, not a height.

#include <optional>
#include <string>
#include <vector>

#include "hybridlens/fields.hpp"
#include "hybridlens/grid.hpp"
#include "hybridlens/report.hpp"
#include "hybridlens/snell.hpp"
#include "hybridlens/surface.hpp"

namespace hybridlens {

/// Everything between the two faces for one ray.
struct MidPoint {
  Vec3 e;
  Vec3 P;
  Vec3 nu;
  Vec3 m;
  double lambda{};
  double d{};
  Vec2 Q;
  double delta{kNaN};  ///< only for the vertical formulas
};

/// General formulas: ν from P_{x₁} × P_{x₂} oriented upward, then the
/// standard law. Throws NonPositiveDepth when a − ρe₃ ≤ 0.
MidPoint midfield_at(const IncidentField& field, const Surface& rho, const OpticalConstants& constants, const Vec2& x);
/// Vertical-field closed forms from Δ = sqrt(κ₁² + (κ₁² − 1)|Dρ|²).
MidPoint midfield_vertical_at(const SurfaceJet& jet, const OpticalConstants& constants, const Vec2& x);

struct MidField {
  Grid2D grid;
  GridField<Vec3> m;
  ScalarGrid d;
  VectorGrid Q;
  ScalarGrid delta;  ///< NaN for the general formulas
};

MidField midfield_general(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                          const Grid2D& grid);
MidField midfield_vertical(const Surface& rho, const OpticalConstants& constants, const Grid2D& grid);

struct FarfieldOptions {
  double fd_step{1e-4};  ///< central differences for Dm and D(mDe)
  bool allow_fd{true};   ///< false: DerivativeUnavailable instead of FD fallbacks
};

/// The five terms of the sufficient-condition matrix at x0.
struct SufficientTerms {
  Mat2 d2h;        ///< D²h = De′
  Mat2 bend;       ///< (1 − κ₁e·m)D²ρ
  Mat2 cross;      ///< −κ₁(Dρ⊗(mDe) + (mDe)⊗Dρ)
  Mat2 curvature;  ///< −κ₁ρ(D(mDe) − De⊗Dm)
  Mat2 spread;     ///< κ₁d Dm⊗Dm

  Mat2 total() const { return d2h + bend + cross + curvature + spread; }
};

SufficientTerms sufficient_terms(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                                 const Vec2& x0, const FarfieldOptions& options = {});

/// det of the sufficient-condition matrix (id big_det). Nonzero means
/// |det| > kNonzeroRelTol·max(‖B‖_F, 1/a)².
ConditionReport sufficient_det_general(const IncidentField& field, const Surface& rho,
                                       const OpticalConstants& constants, const Vec2& x0,
                                       const FarfieldOptions& options = {});

/// Vertical field: det D²ρ ≠ 0 (id det_D2rho, scale max(‖D²ρ‖_F, 1/a)) and
/// det 𝒜 ≠ 0 (id det_A, scale max(‖𝒜‖_F, 1)).
ConditionReport sufficient_det_vertical(const Surface& rho, const OpticalConstants& constants, const Vec2& x0);

/// det B predicted from the vertical factorization
/// B = D²ρ·((1 − κ₁²)/(1 + Δ))·𝒲·𝒜 with det 𝒲 = κ₁²/Δ².
double vertical_big_det(const SurfaceJet& jet, const OpticalConstants& constants);

struct EigenThresholds {
  double upper{};  ///< Λ₂ must exceed this
  double lower{};  ///< or Λ₁ must stay below this
};

EigenThresholds eigenvalue_thresholds(const SurfaceJet& jet, const OpticalConstants& constants);

/// Λ₁ ≥ Λ₂ of D²ρ(x0); passes iff Λ₂ > upper or Λ₁ < lower (strict).
/// Sufficient only. Throws SingularHessian when D²ρ(x0) is singular.
ConditionReport eigenvalue_sufficient(const Surface& rho, const OpticalConstants& constants, const Vec2& x0);

struct PhaseMap {
  Grid2D grid;       ///< the source grid the samples are indexed by
  VectorGrid Q;      ///< footprint on σ₂
  ScalarGrid phi;    ///< radians
  VectorGrid grad;   ///< k(m₁, m₂)
  double k{1.0};
  double a{1.0};
  double kappa2{1.0};
  std::vector<std::string> warnings;

  /// ∇φ on σ₂ from the samples alone: ∂φ/∂x and DQ by grid differences
  /// (fourth order where the neighbours exist), then DQ⁻ᵀ.
  VectorGrid fd_gradient() const;
};

/// φ(Q(x)) = k(h/κ₁ + ρ/κ₁ + d). h comes from the field's potential, or is
/// recovered on the grid. A failing sufficient determinant at x0 is recorded
/// as a warning. Throws NonInjectiveFootprint when the Q grid folds.
PhaseMap build_phase(const IncidentField& field, const Surface& rho, const MidField& midfield,
                     const OpticalConstants& constants, const Vec2& x0);

/// Looks up footprint cells and blends the corner FD gradients with the
/// inverse bilinear coordinates.
class PhaseInterpolator {
 public:
  explicit PhaseInterpolator(const PhaseMap& phase, double gradient_scale = 1.0);

  struct Hit {
    int i{};
    int j{};
    double s{};
    double t{};
  };
  std::optional<Hit> locate(const Vec2& u) const;
  /// Interpolated ∇φ at u; nullopt outside the footprint.
  std::optional<Vec2> gradient(const Vec2& u) const;
  std::optional<double> value(const Vec2& u) const;

 private:
  const PhaseMap* phase_;
  VectorGrid grad_;
  Box2 bbox_;
  int bx_{1};
  int by_{1};
  std::vector<std::vector<std::pair<int, int>>> buckets_;
};

/// Max over interior nodes of |e′ − ∇(κ₁f − ρ − κ₁d)|, with f integrated
/// from f_{x_i} = (Q_{x_i}, 0)·m along staircases and ∇ by fourth-order grid
/// differences.
struct NecessaryResidual {
  double max_residual{};
  std::size_t nodes{};
};
NecessaryResidual necessary_identity(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                                     const Grid2D& grid, const Vec2& base);

}  // namespace hybridlens
