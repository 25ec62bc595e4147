#include "hybridlens/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hybridlens/errors.hpp"

namespace hybridlens {

using io::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  object(j, where);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) {
      std::string list;
      for (const auto* a : keys) list += std::string(list.empty() ? "" : ", ") + a;
      fail(where, "unknown key '" + k + "' (allowed: " + list + ")");
    }
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing required key '") + key + "'");
  return j.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

double number(const json& j, const std::string& where, const char* key) {
  return number(require(j, where, key), where + "." + key);
}

double number_or(const json& j, const std::string& where, const char* key, double fallback) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

long long integer(const json& v, const std::string& where, long long min) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  const long long n = v.get<long long>();
  if (n < min) fail(where, "must be at least " + std::to_string(min));
  return n;
}

std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where, std::size_t count) {
  if (!v.is_array() || (count && v.size() != count)) {
    fail(where, count ? "expected an array of " + std::to_string(count) + " numbers" : "expected an array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Vec2 vec2(const json& v, const std::string& where) {
  const auto n = numbers(v, where, 2);
  return {n[0], n[1]};
}

Vec3 vec3(const json& v, const std::string& where) {
  const auto n = numbers(v, where, 3);
  return {n[0], n[1], n[2]};
}

OpticalConstants parse_constants(const json& j) {
  const std::string w = "constants";
  only_keys(j, w, {"n1", "n2", "n3", "k", "a", "c"});
  OpticalConstants c;
  c.n1 = number_or(j, w, "n1", c.n1);
  c.n2 = number_or(j, w, "n2", c.n2);
  c.n3 = number_or(j, w, "n3", c.n3);
  c.k = number_or(j, w, "k", c.k);
  c.a = number_or(j, w, "a", c.a);
  c.c = number_or(j, w, "c", c.c);
  return c;
}

MapSpec parse_map(const json& j) {
  const std::string w = "map";
  object(j, w);
  MapSpec m;
  m.name = string(require(j, w, "name"), w + ".name");
  if (m.name == "identity") {
    only_keys(j, w, {"name"});
  } else if (m.name == "dilation" || m.name == "rotation") {
    only_keys(j, w, {"name", "alpha"});
    m.params["alpha"] = number(j, w, "alpha");
  } else if (m.name == "horizontal") {
    only_keys(j, w, {"name", "c0", "c1", "c2", "c3"});
    m.params["c0"] = number(j, w, "c0");
    m.params["c1"] = number(j, w, "c1");
    m.params["c2"] = number_or(j, w, "c2", 0.0);
    m.params["c3"] = number_or(j, w, "c3", 0.0);
  } else if (m.name == "eikonal" || m.name == "eikonal_distance") {
    only_keys(j, w, {"name", "gamma"});
    const Vec2 g = vec2(require(j, w, "gamma"), w + ".gamma");
    m.params["gamma1"] = g.x;
    m.params["gamma2"] = g.y;
  } else {
    fail(w + ".name", "unknown map '" + m.name + "' (identity, dilation, rotation, horizontal, eikonal)");
  }
  return m;
}

FieldSpec parse_field(const json& j) {
  const std::string w = "field";
  object(j, w);
  FieldSpec f;
  f.name = string(require(j, w, "name"), w + ".name");
  if (f.name == "vertical") {
    only_keys(j, w, {"name"});
  } else if (f.name == "collimated") {
    only_keys(j, w, {"name", "direction"});
    f.vector = vec3(require(j, w, "direction"), w + ".direction");
  } else if (f.name == "point_source") {
    only_keys(j, w, {"name", "source"});
    f.vector = vec3(require(j, w, "source"), w + ".source");
  } else if (f.name == "swirl") {
    only_keys(j, w, {"name", "scale"});
    f.scale = number(j, w, "scale");
  } else {
    fail(w + ".name", "unknown field '" + f.name + "' (vertical, collimated, point_source, swirl)");
  }
  return f;
}

SurfaceSpec parse_surface(const json& j) {
  const std::string w = "surface";
  object(j, w);
  SurfaceSpec s;
  s.name = string(require(j, w, "name"), w + ".name");
  if (s.name == "flat") {
    only_keys(j, w, {"name", "r0"});
    s.r0 = number(j, w, "r0");
  } else if (s.name == "plane") {
    only_keys(j, w, {"name", "r0", "slope"});
    s.r0 = number(j, w, "r0");
    s.gradient = vec2(require(j, w, "slope"), w + ".slope");
  } else if (s.name == "quadratic") {
    only_keys(j, w, {"name", "r0", "gradient", "hessian"});
    s.r0 = number(j, w, "r0");
    s.gradient = j.contains("gradient") ? vec2(j.at("gradient"), w + ".gradient") : Vec2{};
    const json& h = require(j, w, "hessian");
    if (!h.is_array() || h.size() != 2) fail(w + ".hessian", "expected [[h11, h12], [h21, h22]]");
    const Vec2 r0 = vec2(h[0], w + ".hessian[0]");
    const Vec2 r1 = vec2(h[1], w + ".hessian[1]");
    s.hessian = Mat2::from(r0.x, r0.y, r1.x, r1.y);
  } else if (s.name == "polynomial") {
    only_keys(j, w, {"name", "coeffs"});
    const json& cs = require(j, w, "coeffs");
    if (!cs.is_array() || cs.empty()) fail(w + ".coeffs", "expected a nonempty array of [p, q, c]");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string wi = w + ".coeffs[" + std::to_string(i) + "]";
      if (!cs[i].is_array() || cs[i].size() != 3) fail(wi, "expected [p, q, c]");
      const int p = static_cast<int>(integer(cs[i][0], wi + "[0]", 0));
      const int q = static_cast<int>(integer(cs[i][1], wi + "[1]", 0));
      s.poly.coeffs[{p, q}] += number(cs[i][2], wi + "[2]");
    }
  } else {
    fail(w + ".name", "unknown surface '" + s.name + "' (flat, plane, quadratic, polynomial)");
  }
  return s;
}

GridSpec parse_grid(const json& j) {
  const std::string w = "grid";
  only_keys(j, w, {"lo", "hi", "n", "patch"});
  GridSpec g;
  g.box.lo = vec2(require(j, w, "lo"), w + ".lo");
  g.box.hi = vec2(require(j, w, "hi"), w + ".hi");
  if (!(g.box.lo.x < g.box.hi.x) || !(g.box.lo.y < g.box.hi.y)) fail(w, "need lo < hi in both coordinates");
  if (j.contains("n")) {
    const json& n = j.at("n");
    if (n.is_array()) {
      if (n.size() != 2) fail(w + ".n", "expected N or [nx, ny]");
      g.nx = static_cast<int>(integer(n[0], w + ".n[0]", 2));
      g.ny = static_cast<int>(integer(n[1], w + ".n[1]", 2));
    } else {
      g.nx = g.ny = static_cast<int>(integer(n, w + ".n", 2));
    }
  }
  if (j.contains("patch")) {
    const std::string p = string(j.at("patch"), w + ".patch");
    if (p == "disk") {
      g.patch = PatchShape::disk;
    } else if (p != "box") {
      fail(w + ".patch", "expected \"box\" or \"disk\"");
    }
  }
  return g;
}

ToleranceSpec parse_tolerances(const json& j) {
  const std::string w = "tolerances";
  only_keys(j, w, {"check", "path", "substeps", "landing", "direction"});
  ToleranceSpec t;
  t.check = number_or(j, w, "check", t.check);
  if (j.contains("path")) t.path = number(j.at("path"), w + ".path");
  if (j.contains("substeps")) t.substeps = static_cast<int>(integer(j.at("substeps"), w + ".substeps", 1));
  if (j.contains("landing")) t.landing = number(j.at("landing"), w + ".landing");
  if (j.contains("direction")) t.direction = number(j.at("direction"), w + ".direction");
  if (!(t.check > 0.0)) fail(w + ".check", "must be positive");
  return t;
}

TraceSpec parse_trace(const json& j) {
  const std::string w = "trace";
  only_keys(j, w, {"samples", "seed", "gradient_mode"});
  TraceSpec t;
  if (j.contains("samples")) t.samples = static_cast<std::size_t>(integer(j.at("samples"), w + ".samples", 1));
  if (j.contains("seed")) t.seed = static_cast<unsigned long long>(integer(j.at("seed"), w + ".seed", 0));
  if (j.contains("gradient_mode")) {
    try {
      t.mode = parse_gradient_mode(string(j.at("gradient_mode"), w + ".gradient_mode"));
    } catch (const InvalidArgument& e) {
      fail(w + ".gradient_mode", e.what());
    }
  }
  return t;
}

Plot2DSpec parse_plot2d(const json& j) {
  const std::string w = "plot2d";
  only_keys(j, w, {"alphas", "z0", "t", "step"});
  Plot2DSpec p;
  p.alphas = numbers(require(j, w, "alphas"), w + ".alphas", 0);
  if (p.alphas.empty()) fail(w + ".alphas", "needs at least one value");
  p.z0 = number(j, w, "z0");
  const Vec2 t = vec2(require(j, w, "t"), w + ".t");
  p.t_lo = t.x;
  p.t_hi = t.y;
  p.step = number_or(j, w, "step", p.step);
  if (!(p.t_lo <= 0.0 && p.t_hi >= 0.0)) fail(w + ".t", "need t_lo <= 0 <= t_hi");
  if (!(p.step > 0.0)) fail(w + ".step", "must be positive");
  return p;
}

LemmaSpec parse_lemma(const json& j) {
  const std::string w = "lemma";
  only_keys(j, w, {"samples", "seed", "tol"});
  LemmaSpec l;
  if (j.contains("samples")) l.samples = static_cast<std::size_t>(integer(j.at("samples"), w + ".samples", 1));
  if (j.contains("seed")) l.seed = static_cast<unsigned long long>(integer(j.at("seed"), w + ".seed", 0));
  l.tol = number_or(j, w, "tol", l.tol);
  return l;
}

}  // namespace

TargetMap MapSpec::build() const { return io::map_from_params(name, params); }

IncidentField FieldSpec::build() const {
  if (name == "vertical") return IncidentField::vertical();
  if (name == "collimated") return IncidentField::collimated(vector);
  if (name == "point_source") return IncidentField::point_source(vector);
  if (name == "swirl") return IncidentField::swirl(scale);
  throw InvalidArgument("unknown field '" + name + "'");
}

Surface SurfaceSpec::build() const {
  if (name == "flat") return Surface::flat(r0);
  if (name == "plane") return Surface::plane(r0, gradient);
  if (name == "quadratic") return Surface::quadratic(r0, gradient, hessian);
  if (name == "polynomial") return Surface::polynomial(poly, "polynomial");
  throw InvalidArgument("unknown surface '" + name + "'");
}

Vec2 DesignConfig::basepoint() const {
  if (x0) return *x0;
  if (grid) return grid->box.center();
  return {0.0, 0.0};
}

DesignConfig parse_config(const json& j) {
  only_keys(j, "config",
            {"constants", "map", "field", "surface", "grid", "x0", "z0", "tolerances", "trace", "plot2d", "lemma",
             "output_dir"});
  DesignConfig c;
  try {
    if (j.contains("constants")) c.constants = parse_constants(j.at("constants"));
    if (j.contains("map")) c.map = parse_map(j.at("map"));
    if (j.contains("field")) c.field = parse_field(j.at("field"));
    if (j.contains("surface")) c.surface = parse_surface(j.at("surface"));
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("x0")) c.x0 = vec2(j.at("x0"), "x0");
    if (j.contains("z0")) c.z0 = number(j.at("z0"), "z0");
    if (j.contains("tolerances")) c.tolerances = parse_tolerances(j.at("tolerances"));
    if (j.contains("trace")) c.trace = parse_trace(j.at("trace"));
    if (j.contains("plot2d")) c.plot2d = parse_plot2d(j.at("plot2d"));
    if (j.contains("lemma")) c.lemma = parse_lemma(j.at("lemma"));
    if (j.contains("output_dir")) c.output_dir = string(j.at("output_dir"), "output_dir");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  try {
    c.constants.validate_lens();
  } catch (const InvalidArgument& e) {
    fail("constants", e.what());
  }
  if (c.map && c.field) fail("config", "map and field are mutually exclusive");
  if (c.surface && !c.field) fail("surface", "only used together with a field");
  if (c.field && c.field->name == "collimated" && !(c.field->vector.z > 0.0))
    fail("field.direction", "needs a positive third component");
  if (c.field && c.field->name == "point_source" && !(c.field->vector.z < 0.0))
    fail("field.source", "must lie below the plane x3 = 0");
  if (c.map) {
    try {
      c.map->build();
    } catch (const Error& e) {
      fail("map", e.what());
    }
  }
  if (c.z0 && !(*c.z0 > 0.0 && *c.z0 < c.constants.a)) fail("z0", "must lie in (0, a)");
  if (c.x0 && c.grid && !c.grid->build().contains(*c.x0)) fail("x0", "lies outside the grid patch");
  if (c.plot2d && !(c.plot2d->z0 > 0.0 && c.plot2d->z0 < c.constants.a)) fail("plot2d.z0", "must lie in (0, a)");
  return c;
}

DesignConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

DesignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace hybridlens
