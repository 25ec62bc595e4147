#include "hybridlens/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "hybridlens/errors.hpp"

namespace hybridlens::io {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::string format_short(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  // from_chars rejects a leading '+', which other writers may emit.
  if (first != last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw InvalidArgument("CsvWriter: row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  out_ << line;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("write failed: " + path_.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << t.header.size() << " fields, got " << cells.size();
      throw IoError(msg.str());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

json to_json(const OpticalConstants& c) {
  return {{"n1", c.n1}, {"n2", c.n2}, {"n3", c.n3}, {"k", c.k}, {"a", c.a}, {"c", c.c}};
}

json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

namespace {

// NaN and infinities have no JSON literal; they go out as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number_from(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

json to_json(const ConditionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"id", e.id},
                       {"name", e.name},
                       {"value", number(e.value)},
                       {"threshold", number(e.threshold)},
                       {"margin", number(e.margin)},
                       {"passed", e.passed},
                       {"detail", e.detail}});
  }
  json failing = json::array();
  for (const auto& f : r.failing()) failing.push_back(f);
  return {{"title", r.title}, {"passed", r.passed()}, {"failing", failing}, {"entries", entries}, {"notes", r.notes}};
}

json grid_to_json(const Grid2D& g) {
  return {{"lo", to_json(g.box().lo)},
          {"hi", to_json(g.box().hi)},
          {"nx", g.nx()},
          {"ny", g.ny()},
          {"patch", g.shape() == PatchShape::disk ? "disk" : "box"}};
}

Grid2D grid_from_json(const json& j) {
  const auto lo = j.at("lo");
  const auto hi = j.at("hi");
  const std::string patch = j.at("patch").get<std::string>();
  if (patch != "disk" && patch != "box") throw InvalidArgument("unknown patch '" + patch + "'");
  return Grid2D({{lo.at(0).get<double>(), lo.at(1).get<double>()}, {hi.at(0).get<double>(), hi.at(1).get<double>()}},
                j.at("nx").get<int>(), j.at("ny").get<int>(), patch == "disk" ? PatchShape::disk : PatchShape::box);
}

TargetMap map_from_params(const std::string& name, const TargetMap::Params& p) {
  auto get = [&](const char* key, std::optional<double> fallback = std::nullopt) {
    const auto it = p.find(key);
    if (it != p.end()) return it->second;
    if (fallback) return *fallback;
    throw InvalidArgument("map '" + name + "' needs parameter '" + key + "'");
  };
  if (name == "identity") return TargetMap::identity();
  if (name == "dilation") return TargetMap::dilation(get("alpha"));
  if (name == "rotation") return TargetMap::rotation(get("alpha"));
  if (name == "horizontal") return TargetMap::horizontal(get("c0"), get("c1"), get("c2", 0.0), get("c3", 0.0));
  if (name == "eikonal" || name == "eikonal_distance") return TargetMap::eikonal_distance({get("gamma1"), get("gamma2")});
  throw InvalidArgument("no built-in map named '" + name + "'");
}

void write_design(const LensDesign& d, const fs::path& dir) {
  if (d.map.name() != "identity" && d.map.params().empty())
    throw InvalidArgument("write_design: map '" + d.map.name() + "' is not a built-in map and cannot be saved");
  fs::create_directories(dir);
  json params = json::object();
  for (const auto& [k, v] : d.map.params()) params[k] = v;
  json j = {{"constants", to_json(d.constants)},
            {"map", {{"name", d.map.name()}, {"params", params}}},
            {"grid", grid_to_json(d.grid)},
            {"x0", to_json(d.x0)},
            {"z0", d.z0},
            {"rk_step", d.rk_step},
            {"path_residual", number(d.path_residual)},
            {"path_tol", number(d.path_tol)},
            {"nodes", "rho.csv"}};
  write_json(dir / "design.json", j);

  CsvWriter csv(dir / "rho.csv",
                {"i", "j", "x1", "x2", "rho", "z", "drho1", "drho2", "d2rho11", "d2rho12", "d2rho21", "d2rho22"});
  const Grid2D& g = d.grid;
  for (int jj = 0; jj < g.ny(); ++jj) {
    for (int i = 0; i < g.nx(); ++i) {
      const Vec2 p = g.node(i, jj);
      const Vec2 dr = d.drho.at(i, jj);
      const Mat2 h = d.d2rho.at(i, jj);
      csv.row({double(i), double(jj), p.x, p.y, d.rho.at(i, jj), d.z.at(i, jj), dr.x, dr.y, h(0, 0), h(0, 1), h(1, 0),
               h(1, 1)});
    }
  }
  csv.close();
}

LensDesign read_design(const fs::path& dir) {
  const json j = read_json(dir / "design.json");
  LensDesign d;
  const json& c = j.at("constants");
  d.constants.n1 = c.at("n1").get<double>();
  d.constants.n2 = c.at("n2").get<double>();
  d.constants.n3 = c.at("n3").get<double>();
  d.constants.k = c.at("k").get<double>();
  d.constants.a = c.at("a").get<double>();
  d.constants.c = c.at("c").get<double>();
  TargetMap::Params params;
  for (const auto& [k, v] : j.at("map").at("params").items()) params[k] = v.get<double>();
  d.map = map_from_params(j.at("map").at("name").get<std::string>(), params);
  d.grid = grid_from_json(j.at("grid"));
  d.x0 = {j.at("x0").at(0).get<double>(), j.at("x0").at(1).get<double>()};
  d.z0 = j.at("z0").get<double>();
  d.rk_step = j.at("rk_step").get<double>();
  d.path_residual = number_from(j.at("path_residual"));
  d.path_tol = number_from(j.at("path_tol"));

  const Grid2D& g = d.grid;
  d.rho = nan_scalar_grid(g);
  d.z = nan_scalar_grid(g);
  d.drho = nan_vector_grid(g);
  d.d2rho = GridField<Mat2>(g, Mat2::from(kNaN, kNaN, kNaN, kNaN));
  const CsvTable t = read_csv(dir / j.value("nodes", std::string("rho.csv")));
  const std::size_t ci = t.column("i"), cj = t.column("j"), cr = t.column("rho"), cz = t.column("z");
  const std::size_t cd1 = t.column("drho1"), cd2 = t.column("drho2");
  const std::size_t h11 = t.column("d2rho11"), h12 = t.column("d2rho12"), h21 = t.column("d2rho21"),
                    h22 = t.column("d2rho22");
  for (const auto& row : t.rows) {
    const int i = static_cast<int>(row[ci]);
    const int jj = static_cast<int>(row[cj]);
    if (i < 0 || jj < 0 || i >= g.nx() || jj >= g.ny()) throw IoError("rho.csv: node index outside the grid");
    d.rho.at(i, jj) = row[cr];
    d.z.at(i, jj) = row[cz];
    d.drho.at(i, jj) = {row[cd1], row[cd2]};
    d.d2rho.at(i, jj) = Mat2::from(row[h11], row[h12], row[h21], row[h22]);
  }
  return d;
}

void write_phase(const PhaseMap& phase, const fs::path& dir) {
  fs::create_directories(dir);
  CsvWriter csv(dir / "phase.csv", {"i", "j", "Q1", "Q2", "phi", "dphi_du1", "dphi_du2"});
  const Grid2D& g = phase.grid;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      const Vec2 q = phase.Q.at(i, j);
      const Vec2 gr = phase.grad.at(i, j);
      csv.row({double(i), double(j), q.x, q.y, phase.phi.at(i, j), gr.x, gr.y});
    }
  }
  csv.close();
  write_json(dir / "phase.json", {{"k", phase.k},
                                  {"a", phase.a},
                                  {"kappa2", phase.kappa2},
                                  {"grid", grid_to_json(g)},
                                  {"warnings", phase.warnings}});
}

void write_trace_csv(const TraceReport& report, const fs::path& path) {
  CsvWriter csv(path, {"x1",      "x2",      "hit1",         "hit2",          "hit3",        "m1",
                       "m2",      "m3",      "u1",           "u2",            "dphi_du1",    "dphi_du2",
                       "w1",      "w2",      "w3",           "landing1",      "landing2",    "target1",
                       "target2", "direction_error", "landing_error", "snell_residual"});
  for (const auto& r : report.rays) {
    csv.row({r.x.x,        r.x.y,        r.hit.x,      r.hit.y,          r.hit.z,         r.m.x,
             r.m.y,        r.m.z,        r.u.x,        r.u.y,            r.grad_phi.x,    r.grad_phi.y,
             r.exit.x,     r.exit.y,     r.exit.z,     r.landing.x,      r.landing.y,     r.target.x,
             r.target.y,   r.direction_error, r.landing_error, r.snell_residual});
  }
  csv.close();
}

json trace_summary(const TraceReport& report) {
  json j = {{"gradient_mode", to_string(report.mode)},
            {"rays", report.rays.size()},
            {"max_direction_error", number(report.max_direction_error)},
            {"mean_direction_error", number(report.mean_direction_error)},
            {"max_landing_error", number(report.max_landing_error)},
            {"mean_landing_error", number(report.mean_landing_error)},
            {"max_snell_residual", number(report.max_snell_residual)}};
  if (!report.rays.empty()) {
    const SpotDiagram s = spot_diagram(report);
    j["spot"] = {{"centroid", to_json(s.centroid)},
                 {"rms_radius", s.rms_radius},
                 {"p50", s.p50},
                 {"p90", s.p90},
                 {"p99", s.p99},
                 {"max_radius", s.max_radius}};
  }
  return j;
}

void write_spot_csv(const SpotDiagram& spot, const fs::path& path) {
  CsvWriter csv(path, {"x1", "x2", "landing1", "landing2", "target1", "target2", "radius"});
  for (const auto& r : spot.rows) csv.row({r.x.x, r.x.y, r.landing.x, r.landing.y, r.target.x, r.target.y, r.radius});
  csv.close();
}

}  // namespace hybridlens::io
