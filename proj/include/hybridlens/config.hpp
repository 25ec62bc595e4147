#pragma once
// Batch configuration: one JSON document, validated before any computation.
// Unknown keys anywhere are rejected with ConfigError.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybridlens/fields.hpp"
#include "hybridlens/io.hpp"
#include "hybridlens/maps.hpp"
#include "hybridlens/raytrace.hpp"
#include "hybridlens/snell.hpp"
#include "hybridlens/surface.hpp"

namespace hybridlens {

struct MapSpec {
  std::string name;
  TargetMap::Params params;
  TargetMap build() const;
};

struct FieldSpec {
  std::string name;   ///< vertical, collimated, point_source, swirl
  Vec3 vector;        ///< direction (collimated) or source (point_source)
  double scale{};     ///< swirl
  IncidentField build() const;
};

struct SurfaceSpec {
  std::string name;   ///< flat, plane, quadratic, polynomial
  double r0{};
  Vec2 gradient;
  Mat2 hessian;
  Poly2 poly;
  Surface build() const;
};

struct GridSpec {
  Box2 box;
  int nx{201};
  int ny{201};
  PatchShape patch{PatchShape::box};
  Grid2D build() const { return Grid2D(box, nx, ny, patch); }
};

struct ToleranceSpec {
  double check{1e-10};              ///< admissibility and curl
  std::optional<double> path;       ///< PathInconsistency limit
  int substeps{1};
  std::optional<double> landing;    ///< gate on the trace's max landing error
  std::optional<double> direction;  ///< gate on the trace's max direction error
};

struct TraceSpec {
  std::size_t samples{1000};
  unsigned long long seed{1};
  GradientMode mode{GradientMode::fd_phase};
};

struct Plot2DSpec {
  std::vector<double> alphas;
  double z0{};
  double t_lo{};
  double t_hi{};
  double step{1e-2};
};

struct LemmaSpec {
  std::size_t samples{1000};
  unsigned long long seed{1};
  double tol{1e-11};
};

struct DesignConfig {
  OpticalConstants constants;
  std::optional<MapSpec> map;
  std::optional<FieldSpec> field;
  std::optional<SurfaceSpec> surface;
  std::optional<GridSpec> grid;
  std::optional<Vec2> x0;
  std::optional<double> z0;
  ToleranceSpec tolerances;
  TraceSpec trace;
  std::optional<Plot2DSpec> plot2d;
  LemmaSpec lemma;
  std::filesystem::path output_dir{"out"};

  /// x0, defaulting to the grid's box center.
  Vec2 basepoint() const;
};

/// Throws ConfigError for malformed documents, unknown keys and invalid values.
DesignConfig parse_config(const io::json& j);
DesignConfig parse_config_text(const std::string& text);
DesignConfig load_config(const std::filesystem::path& path);

}  // namespace hybridlens
