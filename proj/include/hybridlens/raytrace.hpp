#pragma once
// Forward ray tracing through a built lens: source plane → σ₁ (standard
// refraction) → σ₂ at x₃ = a (metasurface) → target plane x₃ = c.

#include <optional>
#include <string>
#include <vector>

#include "hybridlens/farfield.hpp"
#include "hybridlens/fields.hpp"
#include "hybridlens/imaging.hpp"
#include "hybridlens/maps.hpp"
#include "hybridlens/surface.hpp"

namespace hybridlens {

struct Ray {
  Vec3 origin;
  UnitVec3 direction;
};

/// Lower face as a height graph, its path-length reading along the field,
/// and the phase built for it.
struct Lens {
  IncidentField field = IncidentField::vertical();
  Surface graph = Surface::flat(0.0);
  Surface rho = Surface::flat(0.0);
  OpticalConstants constants;
  PhaseMap phase;
  Vec2 x0;

  /// Midfield and phase on grid, constant of φ pinned at x0.
  static Lens build(const IncidentField& field, const Surface& graph, const OpticalConstants& constants,
                    const Grid2D& grid, const Vec2& x0);
  /// Vertical field over the bicubic interpolant of a solved design.
  static Lens from_design(const LensDesign& design);
};

enum class GradientMode { analytic, fd_phase };

const char* to_string(GradientMode mode);
/// "analytic", or "fd" / "fd_phase". Throws InvalidArgument.
GradientMode parse_gradient_mode(const std::string& s);

struct TraceOptions {
  GradientMode mode{GradientMode::fd_phase};
  /// Multiplies ∇φ before the metasurface refraction (fault injection).
  double gradient_scale{1.0};
  /// Landing targets (Tx, c); without it landing errors are NaN.
  std::optional<TargetMap> target;
};

struct RayRecord {
  Vec2 x;
  Vec3 e;
  Vec3 hit;        ///< on σ₁
  Vec3 nu;
  Vec3 m;          ///< inside the lens
  Vec2 u;          ///< metasurface point
  Vec2 grad_phi;
  Vec3 exit;
  Vec2 landing;    ///< on x₃ = c
  Vec2 target{kNaN, kNaN};
  double direction_error{};
  double landing_error{kNaN};
  double snell_residual{};  ///< |e×ν − κ₁ m×ν|
};

struct TraceReport {
  GradientMode mode{GradientMode::fd_phase};
  std::vector<RayRecord> rays;
  double max_direction_error{};
  double mean_direction_error{};
  double max_landing_error{kNaN};
  double mean_landing_error{kNaN};
  double max_snell_residual{};
};

/// One record per sample, in input order. Throws MissedSurface when a ray
/// misses σ₁ or lands outside the phase footprint; Snell errors propagate.
TraceReport trace_through(const Lens& lens, const std::vector<Vec2>& samples, const TraceOptions& options = {});

struct SpotRow {
  Vec2 x;
  Vec2 landing;
  Vec2 target;
  double radius{};  ///< distance to the target, or to the centroid without one
};

struct SpotDiagram {
  std::vector<SpotRow> rows;
  Vec2 centroid;
  double rms_radius{};
  double p50{};
  double p90{};
  double p99{};
  double max_radius{};
};

/// Throws InvalidArgument on an empty report.
SpotDiagram spot_diagram(const TraceReport& report);

/// n samples uniformly in the patch of grid restricted to cells the lens
/// interpolant covers (rejection sampling, deterministic for a seed).
std::vector<Vec2> sample_patch(const Grid2D& grid, std::size_t n, unsigned long long seed);

}  // namespace hybridlens
