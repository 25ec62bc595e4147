#pragma once
// File emission: CSV with 17 significant digits in C-locale form, JSON via
// nlohmann::json, and the on-disk form of designs, phase maps and traces.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridlens/farfield.hpp"
#include "hybridlens/imaging.hpp"
#include "hybridlens/raytrace.hpp"
#include "hybridlens/report.hpp"

namespace hybridlens::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// 17 significant digits, "%.17g" style, independent of the global locale.
std::string format_double(double v);
/// Shortest form that reads back to v ("0.3", not "0.29999999999999999").
std::string format_short(double v);
/// Strict parse of a whole field; throws InvalidArgument.
double parse_double(const std::string& s);

/// Comma-separated rows with a header. Values go through format_double.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void close();

 private:
  fs::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// Index of a header column; throws InvalidArgument.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const fs::path& path);

void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

json to_json(const OpticalConstants& c);
json to_json(const ConditionReport& r);
json to_json(const Vec2& v);
json to_json(const Vec3& v);
json grid_to_json(const Grid2D& g);
Grid2D grid_from_json(const json& j);

/// Rebuilds a built-in map from its name and parameters.
TargetMap map_from_params(const std::string& name, const TargetMap::Params& params);

/// design.json (metadata) and rho.csv (one row per node, NaN for inactive
/// nodes) in dir.
void write_design(const LensDesign& design, const fs::path& dir);
/// Inverse of write_design; grids reload bit for bit.
LensDesign read_design(const fs::path& dir);

/// phase.csv (Q₁, Q₂, φ, ∂φ/∂u₁, ∂φ/∂u₂ per active node) and phase.json
/// (k, a, κ₂, warnings).
void write_phase(const PhaseMap& phase, const fs::path& dir);

/// Per-ray CSV.
void write_trace_csv(const TraceReport& report, const fs::path& path);
/// Aggregates plus spot quantiles.
json trace_summary(const TraceReport& report);
void write_spot_csv(const SpotDiagram& spot, const fs::path& path);

}  // namespace hybridlens::io
