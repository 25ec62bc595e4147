#pragma once
// Incident direction fields e(x) = (e′(x), e₃(x)) emitted from the plane
// {x₃ = 0}, the curl test on e′ and recovery of a potential h with ∇h = e′.

#include <optional>
#include <string>

#include "hybridlens/geometry.hpp"
#include "hybridlens/grid.hpp"
#include "hybridlens/report.hpp"

namespace hybridlens {

class IncidentField {
 public:
  using Direction = std::function<Vec3(const Vec2&)>;
  using Jacobian = std::function<Mat32(const Vec2&)>;
  using Potential = std::function<double(const Vec2&)>;

  /// A user field. Without an analytic Jacobian, De falls back to central
  /// differences.
  IncidentField(std::string name, Direction e, std::optional<Jacobian> de = std::nullopt,
                std::optional<Potential> h = std::nullopt, Box2 domain = Box2::plane());

  /// e ≡ (0, 0, 1).
  static IncidentField vertical();
  /// Constant e; the argument is normalized and needs e₃ > 0.
  static IncidentField collimated(const Vec3& e);
  /// Rays from a point source R below the plane: e = ((x,0) − R)/|(x,0) − R|.
  static IncidentField point_source(const Vec3& source);
  /// e′ = scale·(−x₂, x₁), e₃ = sqrt(1 − |e′|²). Not curl free: ∇×e′ = 2·scale.
  static IncidentField swirl(double scale);

  const std::string& name() const { return name_; }
  const Box2& domain() const { return domain_; }
  bool is_vertical() const { return vertical_; }

  Vec3 direction(const Vec2& x) const { return e_(x); }
  Mat32 jacobian(const Vec2& x) const;
  bool has_analytic_jacobian() const { return de_.has_value(); }

  bool has_potential() const { return h_.has_value(); }
  /// Throws InvalidArgument when the field carries no potential.
  double potential(const Vec2& x) const;

 private:
  std::string name_;
  Direction e_;
  std::optional<Jacobian> de_;
  std::optional<Potential> h_;
  Box2 domain_;
  bool vertical_{false};
};

/// Max |∇×e′| over the active grid nodes, plus the unit-length and e₃ > 0
/// invariants. Passes iff every condition holds; the curl is compared with tol.
ConditionReport curl_condition(const IncidentField& field, const Grid2D& grid, double tol);

struct PotentialResult {
  ScalarGrid h;            ///< from the x₁-first staircase, h(basepoint) = 0
  double path_residual{};  ///< max |h(x₁-first) − h(x₂-first)|
  double threshold{};      ///< NotIntegrable limit that was applied
};

/// Line integral of e′ along axis-aligned staircases (composite Simpson).
/// tol defaults to 1e-7·(grid diameter); NotIntegrable is thrown when the two
/// path orders disagree by more than 10·tol.
PotentialResult recover_potential(const IncidentField& field, const Grid2D& grid, const Vec2& basepoint,
                                  std::optional<double> tol = std::nullopt, int panels = 1);

}  // namespace hybridlens
