#include "hybridlens/cli.hpp"

#include <cxxabi.h>

#include <CLI11.hpp>
#include <cmath>
#include <memory>
#include <ostream>
#include <random>
#include <typeinfo>

#include "hybridlens/errors.hpp"
#include "hybridlens/farfield.hpp"
#include "hybridlens/imaging.hpp"
#include "hybridlens/imaging_2d.hpp"
#include "hybridlens/io.hpp"
#include "hybridlens/raytrace.hpp"

namespace hybridlens::cli {

using io::json;
namespace fs = std::filesystem;

namespace {

std::string error_kind(const std::exception& e) {
  int status = 0;
  std::unique_ptr<char, void (*)(void*)> name(abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status),
                                              std::free);
  std::string s = status == 0 && name ? name.get() : typeid(e).name();
  const auto pos = s.rfind("::");
  return pos == std::string::npos ? s : s.substr(pos + 2);
}

const GridSpec& need_grid(const DesignConfig& c, const char* cmd) {
  if (!c.grid) throw ConfigError(std::string(cmd) + " needs a grid");
  return *c.grid;
}

fs::path prepare_out(const DesignConfig& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.output_dir.string() + ": " + ec.message());
  // A stale error file from an earlier failed run would contradict this one.
  fs::remove(c.output_dir / "error.json", ec);
  return c.output_dir;
}

void print_report(std::ostream& log, const ConditionReport& r) {
  for (const auto& e : r.entries) {
    log << "  " << (e.passed ? "pass" : "FAIL") << "  " << e.name << "  value=" << io::format_double(e.value)
        << " threshold=" << io::format_double(e.threshold) << '\n';
  }
  for (const auto& n : r.notes) log << "  note: " << n << '\n';
}

// Integrability and thickness for maps, the curl test for fields.
ConditionReport pre_checks(const DesignConfig& c) {
  const Grid2D grid = need_grid(c, "check").build();
  ConditionReport r;
  if (c.map) {
    const TargetMap map = c.map->build();
    r.title = "map " + map.name();
    r.merge(admissibility(map, grid, c.tolerances.check));
    r.merge(thickness_check(map, c.constants, grid));
  } else if (c.field) {
    const IncidentField field = c.field->build();
    r.title = "field " + field.name();
    r.merge(curl_condition(field, grid, c.tolerances.check));
  } else {
    throw ConfigError("check needs a map or a field");
  }
  return r;
}

LensDesign solve_design(const DesignConfig& c) {
  if (!c.map) throw ConfigError("design-imaging needs a map");
  const Grid2D grid = need_grid(c, "design-imaging").build();
  SolveOptions o;
  o.substeps = c.tolerances.substeps;
  o.path_tol = c.tolerances.path;
  return solve_rho(c.map->build(), c.constants, grid, c.basepoint(), c.z0, o);
}

Lens farfield_lens(const DesignConfig& c) {
  if (!c.field || !c.surface) throw ConfigError("design-farfield needs a field and a surface");
  const Grid2D grid = need_grid(c, "design-farfield").build();
  return Lens::build(c.field->build(), c.surface->build(), c.constants, grid, c.basepoint());
}

// Runs the trace, writes its files and applies the configured gates.
bool trace_and_write(const Lens& lens, const DesignConfig& c, const std::optional<TargetMap>& target,
                     const fs::path& out, std::ostream& log) {
  const Grid2D grid = need_grid(c, "trace").build();
  TraceOptions o;
  o.mode = c.trace.mode;
  o.target = target;
  const TraceReport r = trace_through(lens, sample_patch(grid, c.trace.samples, c.trace.seed), o);
  io::write_trace_csv(r, out / "trace_report.csv");
  io::write_spot_csv(spot_diagram(r), out / "spot.csv");
  json summary = io::trace_summary(r);
  bool ok = true;
  json gates = json::object();
  if (c.tolerances.landing) {
    const bool pass = r.max_landing_error <= *c.tolerances.landing;
    gates["landing"] = {{"limit", *c.tolerances.landing}, {"passed", pass}};
    ok = ok && pass;
  }
  if (c.tolerances.direction) {
    const bool pass = r.max_direction_error <= *c.tolerances.direction;
    gates["direction"] = {{"limit", *c.tolerances.direction}, {"passed", pass}};
    ok = ok && pass;
  }
  summary["gates"] = gates;
  summary["passed"] = ok;
  io::write_json(out / "trace_summary.json", summary);
  log << "trace (" << to_string(r.mode) << ", " << r.rays.size()
      << " rays): max direction error " << io::format_double(r.max_direction_error);
  if (target) log << ", max landing error " << io::format_double(r.max_landing_error);
  log << (ok ? "" : "  [gate FAILED]") << '\n';
  return ok;
}

}  // namespace

DesignConfig apply(DesignConfig c, const Overrides& o) {
  if (o.out) c.output_dir = *o.out;
  if (o.grid) {
    if (!c.grid) throw ConfigError("--grid given but the config has no grid");
    if (*o.grid < 2) throw ConfigError("--grid must be at least 2");
    c.grid->nx = c.grid->ny = *o.grid;
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ConfigError("--tol must be positive");
    c.tolerances.check = *o.tol;
    c.lemma.tol = *o.tol;
  }
  if (o.gradient_mode) {
    try {
      c.trace.mode = parse_gradient_mode(*o.gradient_mode);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--gradient-mode: ") + e.what());
    }
  }
  return c;
}

int cmd_check(const DesignConfig& c, std::ostream& log) {
  const ConditionReport r = pre_checks(c);
  const fs::path out = prepare_out(c);
  io::write_json(out / "check.json", io::to_json(r));
  log << "check " << r.title << ": " << (r.passed() ? "pass" : "FAIL") << '\n';
  print_report(log, r);
  return r.passed() ? kExitPass : kExitDomain;
}

int cmd_design_imaging(const DesignConfig& c, bool force, std::ostream& log) {
  if (!c.map) throw ConfigError("design-imaging needs a map");
  const fs::path out = prepare_out(c);
  const ConditionReport checks = pre_checks(c);
  io::write_json(out / "check.json", io::to_json(checks));
  if (!checks.passed()) {
    log << "design-imaging: checks failed";
    for (const auto& f : checks.failing()) log << " [" << f << "]";
    if (!force) {
      log << "; rerun with --force to continue\n";
      return kExitDomain;
    }
    log << "; continuing (--force)\n";
  }

  const LensDesign d = solve_design(c);
  io::write_design(d, out);
  log << "solved rho on " << d.grid.nx() << "x" << d.grid.ny() << " nodes, z0 = " << io::format_double(d.z0)
      << ", path residual " << io::format_double(d.path_residual) << '\n';

  ConditionReport verdict = existence_verdict(d, d.x0);
  const Lens lens = Lens::from_design(d);
  for (const auto& w : lens.phase.warnings) verdict.notes.push_back("phase: " + w);
  json v = io::to_json(verdict);
  v["x0"] = io::to_json(d.x0);
  v["z0"] = d.z0;
  v["phase_warning"] = !lens.phase.warnings.empty();
  io::write_json(out / "verdict.json", v);
  log << "existence verdict: " << (verdict.passed() ? "pass" : "FAIL") << '\n';
  print_report(log, verdict);

  io::write_phase(lens.phase, out);
  const bool ok = trace_and_write(lens, c, d.map, out, log);
  return ok ? kExitPass : kExitDomain;
}

int cmd_design_farfield(const DesignConfig& c, bool force, std::ostream& log) {
  if (!c.field || !c.surface) throw ConfigError("design-farfield needs a field and a surface");
  const fs::path out = prepare_out(c);
  const ConditionReport checks = pre_checks(c);
  io::write_json(out / "check.json", io::to_json(checks));
  if (!checks.passed()) {
    log << "design-farfield: checks failed";
    for (const auto& f : checks.failing()) log << " [" << f << "]";
    if (!force) {
      log << "; rerun with --force to continue\n";
      return kExitDomain;
    }
    log << "; continuing (--force)\n";
  }

  const Lens lens = farfield_lens(c);
  const Vec2 x0 = c.basepoint();
  ConditionReport verdict;
  if (lens.field.is_vertical()) {
    verdict = sufficient_det_vertical(lens.rho, c.constants, x0);
    try {
      const ConditionReport eig = eigenvalue_sufficient(lens.rho, c.constants, x0);
      for (const auto& e : eig.entries) verdict.notes.push_back("eigenvalue test: " + e.detail);
      verdict.notes.insert(verdict.notes.end(), eig.notes.begin(), eig.notes.end());
    } catch (const SingularHessian& e) {
      verdict.notes.push_back(std::string("eigenvalue test skipped: ") + e.what());
    }
  } else {
    verdict = sufficient_det_general(lens.field, lens.rho, c.constants, x0);
  }
  verdict.title = "sufficient determinant at x0";
  for (const auto& w : lens.phase.warnings) verdict.notes.push_back("phase: " + w);
  json v = io::to_json(verdict);
  v["x0"] = io::to_json(x0);
  v["phase_warning"] = !lens.phase.warnings.empty();
  try {
    const NecessaryResidual nr = necessary_identity(lens.field, lens.rho, c.constants, lens.phase.grid, x0);
    v["necessary_residual"] = {{"max", nr.max_residual}, {"nodes", nr.nodes}};
  } catch (const Error& e) {
    v["necessary_residual"] = {{"error", e.what()}};
  }
  io::write_json(out / "verdict.json", v);
  log << "sufficient determinant: " << (verdict.passed() ? "pass" : "FAIL") << '\n';
  print_report(log, verdict);

  io::write_phase(lens.phase, out);
  const bool ok = trace_and_write(lens, c, std::nullopt, out, log);
  return ok ? kExitPass : kExitDomain;
}

int cmd_trace(const DesignConfig& c, std::ostream& log) {
  const fs::path out = prepare_out(c);
  if (c.map) {
    const LensDesign d = solve_design(c);
    return trace_and_write(Lens::from_design(d), c, d.map, out, log) ? kExitPass : kExitDomain;
  }
  if (c.field && c.surface) return trace_and_write(farfield_lens(c), c, std::nullopt, out, log) ? kExitPass : kExitDomain;
  throw ConfigError("trace needs a map, or a field and a surface");
}

int cmd_plot2d(const DesignConfig& c, std::ostream& log) {
  if (!c.plot2d) throw ConfigError("plot2d needs a plot2d section");
  const Plot2DSpec& p = *c.plot2d;
  const fs::path out = prepare_out(c);
  const double kappa1 = c.constants.kappa1();
  json curves = json::array();
  bool ok = true;
  for (const double alpha : p.alphas) {
    const std::string file = "plot2d_alpha_" + io::format_short(alpha) + ".csv";
    json entry = {{"alpha", alpha}, {"file", file}};
    try {
      const auto prof = solve_rho_2d<double>([alpha](double t) { return alpha * t; }, kappa1, c.constants.a, p.z0,
                                             p.t_lo, p.t_hi, p.step);
      io::CsvWriter csv(out / file, {"t", "rho"});
      for (std::size_t i = 0; i < prof.t.size(); ++i) csv.row({prof.t[i], prof.rho[i]});
      csv.close();
      int up = 0, down = 0;
      for (std::size_t i = 1; i < prof.rho.size(); ++i) {
        if (prof.rho[i] > prof.rho[i - 1]) ++up;
        if (prof.rho[i] < prof.rho[i - 1]) ++down;
      }
      const char* shape = up && down ? "non-monotone" : up ? "increasing" : down ? "decreasing" : "constant";
      entry["feasible"] = true;
      entry["points"] = prof.t.size();
      entry["shape"] = shape;
      entry["rho_min"] = *std::min_element(prof.rho.begin(), prof.rho.end());
      entry["rho_max"] = *std::max_element(prof.rho.begin(), prof.rho.end());
      log << "alpha " << io::format_short(alpha) << ": " << shape << ", " << prof.t.size() << " points -> " << file
          << '\n';
    } catch (const FeasibilityViolation& e) {
      ok = false;
      entry["feasible"] = false;
      entry["error"] = e.what();
      entry["t"] = e.x();
      log << "alpha " << io::format_short(alpha) << ": infeasible: " << e.what() << '\n';
    }
    curves.push_back(entry);
  }
  io::write_json(out / "plot2d.json", {{"kappa1", kappa1},
                                       {"a", c.constants.a},
                                       {"z0", p.z0},
                                       {"t", json::array({p.t_lo, p.t_hi})},
                                       {"step", p.step},
                                       {"curves", curves}});
  return ok ? kExitPass : kExitDomain;
}

int cmd_lemma_check(const DesignConfig& c, std::ostream& log) {
  const fs::path out = prepare_out(c);
  const double kappa1 = c.constants.kappa1();
  const double radius = 0.95 * std::sqrt(kappa1 * kappa1 - 1.0);
  std::mt19937_64 rng(c.lemma.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_abs = 0.0, worst_rel = 0.0;
  Vec2 worst_y;
  for (std::size_t n = 0; n < c.lemma.samples; ++n) {
    const double r = radius * std::sqrt(u(rng));
    const double th = 2.0 * M_PI * u(rng);
    const Vec2 y{r * std::cos(th), r * std::sin(th)};
    const LemmaResidual res = lemma_identity_check(y, kappa1);
    if (res.absolute > worst_abs) {
      worst_abs = res.absolute;
      worst_y = y;
    }
    worst_rel = std::max(worst_rel, res.relative);
  }
  const bool ok = worst_abs <= c.lemma.tol;
  io::write_json(out / "lemma.json", {{"kappa1", kappa1},
                                      {"samples", c.lemma.samples},
                                      {"seed", c.lemma.seed},
                                      {"radius", radius},
                                      {"max_residual", worst_abs},
                                      {"max_relative_residual", worst_rel},
                                      {"worst_y", io::to_json(worst_y)},
                                      {"tol", c.lemma.tol},
                                      {"passed", ok}});
  log << "lemma-check: max residual " << io::format_double(worst_abs) << " over " << c.lemma.samples << " samples ("
      << (ok ? "pass" : "FAIL") << ")\n";
  return ok ? kExitPass : kExitDomain;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hybridlens: design and verification of refractive lenses with a metasurface face", "hybridlens"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir, gradient_mode;
  int grid = 0;
  double tol = 0.0;
  bool force = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--grid", grid, "grid resolution N (N x N nodes)");
  app.add_option("--tol", tol, "check tolerance");
  app.add_flag("--force", force, "continue past failing checks");
  app.add_option("--gradient-mode", gradient_mode, "phase gradient used by the tracer")
      ->check(CLI::IsMember({"analytic", "fd", "fd_phase"}));

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"check", "integrability, thickness or curl conditions"},
                      {"design-imaging", "solve the imaging lens, build its phase and trace it"},
                      {"design-farfield", "far-field lens from a field and a lower surface"},
                      {"trace", "trace rays through the configured lens"},
                      {"plot2d", "one-dimensional profiles for a family of dilations"},
                      {"lemma-check", "random test of the matrix identity used by the existence verdict"}};
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  Overrides o;
  if (!out_dir.empty()) o.out = out_dir;
  if (app.count("--grid")) o.grid = grid;
  if (app.count("--tol")) o.tol = tol;
  if (!gradient_mode.empty()) o.gradient_mode = gradient_mode;
  o.force = force;

  DesignConfig c;
  try {
    if (config_path.empty()) {
      if (cmd != "lemma-check") throw ConfigError(cmd + " needs --config");
    } else {
      c = load_config(config_path);
    }
    c = apply(std::move(c), o);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cmd == "check") return cmd_check(c, out);
    if (cmd == "design-imaging") return cmd_design_imaging(c, force, out);
    if (cmd == "design-farfield") return cmd_design_farfield(c, force, out);
    if (cmd == "trace") return cmd_trace(c, out);
    if (cmd == "plot2d") return cmd_plot2d(c, out);
    return cmd_lemma_check(c, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    json j = {{"command", cmd}, {"error", error_kind(e)}, {"message", e.what()}};
    if (const auto* f = dynamic_cast<const FeasibilityViolation*>(&e)) j["where"] = json::array({f->x(), f->y()});
    try {
      fs::create_directories(c.output_dir);
      io::write_json(c.output_dir / "error.json", j);
    } catch (const std::exception&) {
    }
    err << cmd << ": " << error_kind(e) << ": " << e.what();
    if (const auto* f = dynamic_cast<const FeasibilityViolation*>(&e)) err << " at (" << f->x() << ", " << f->y() << ")";
    err << '\n';
    return kExitDomain;
  }
}

}  // namespace hybridlens::cli
