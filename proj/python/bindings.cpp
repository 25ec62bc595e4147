#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <sstream>

#include "hybridlens/cli.hpp"
#include "hybridlens/errors.hpp"
#include "hybridlens/imaging.hpp"
#include "hybridlens/io.hpp"
#include "hybridlens/maps.hpp"
#include "hybridlens/raytrace.hpp"
#include "hybridlens/snell.hpp"

namespace py = pybind11;
using namespace hybridlens;

namespace {

using V2 = std::array<double, 2>;
using V3 = std::array<double, 3>;

Vec2 v2(const V2& a) { return {a[0], a[1]}; }
Vec3 v3(const V3& a) { return {a[0], a[1], a[2]}; }
V3 arr(const Vec3& v) { return {v.x, v.y, v.z}; }

py::dict report_dict(const ConditionReport& r) {
  // Same shape as the JSON written by the CLI.
  return py::module_::import("json").attr("loads")(io::to_json(r).dump());
}

py::array_t<double> scalar_array(const ScalarGrid& f) {
  const Grid2D& g = f.grid;
  py::array_t<double> out({g.ny(), g.nx()});
  auto a = out.mutable_unchecked<2>();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) a(j, i) = f.at(i, j);
  return out;
}

Grid2D make_grid(const V2& lo, const V2& hi, int nx, int ny, const std::string& patch) {
  if (patch != "box" && patch != "disk") throw InvalidArgument("patch must be 'box' or 'disk'");
  return Grid2D({v2(lo), v2(hi)}, nx, ny, patch == "disk" ? PatchShape::disk : PatchShape::box);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hybridlens core bindings";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<OpticalConstants>(m, "OpticalConstants")
      .def(py::init([](double n1, double n2, double n3, double k, double a, double c) {
             OpticalConstants o;
             o.n1 = n1;
             o.n2 = n2;
             o.n3 = n3;
             o.k = k;
             o.a = a;
             o.c = c;
             o.validate_lens();
             return o;
           }),
           py::arg("n1") = 1.0, py::arg("n2") = 1.5, py::arg("n3") = 1.0, py::arg("k") = 1.0, py::arg("a") = 1.0,
           py::arg("c") = 2.0)
      .def_readonly("n1", &OpticalConstants::n1)
      .def_readonly("n2", &OpticalConstants::n2)
      .def_readonly("n3", &OpticalConstants::n3)
      .def_readonly("k", &OpticalConstants::k)
      .def_readonly("a", &OpticalConstants::a)
      .def_readonly("c", &OpticalConstants::c)
      .def_property_readonly("kappa1", &OpticalConstants::kappa1)
      .def_property_readonly("kappa2", &OpticalConstants::kappa2);

  m.def(
      "refract",
      [](const V3& x, const V3& nu, double kappa) {
        const RefractionResult r = refract_standard(UnitVec3::normalize(v3(x)), UnitVec3::normalize(v3(nu)), kappa);
        return py::make_tuple(arr(r.m.vec()), r.multiplier);
      },
      py::arg("x"), py::arg("nu"), py::arg("kappa"), "Refracted direction and lambda; inputs are normalized.");
  m.def(
      "refract_metasurface",
      [](const V3& x, const V3& nu, double kappa, const V3& grad_phi, double k) {
        const RefractionResult r =
            refract_metasurface(UnitVec3::normalize(v3(x)), UnitVec3::normalize(v3(nu)), kappa, v3(grad_phi), k);
        return py::make_tuple(arr(r.m.vec()), r.multiplier);
      },
      py::arg("x"), py::arg("nu"), py::arg("kappa"), py::arg("grad_phi"), py::arg("k"));
  m.def("deviation_lower_bound", &deviation_lower_bound, py::arg("kappa"));
  m.def(
      "lemma_residual", [](const V2& y, double kappa) { return lemma_identity_check(v2(y), kappa).absolute; },
      py::arg("y"), py::arg("kappa1"));

  py::class_<TargetMap>(m, "TargetMap")
      .def_static("identity", &TargetMap::identity)
      .def_static("dilation", &TargetMap::dilation, py::arg("alpha"))
      .def_static("rotation", &TargetMap::rotation, py::arg("alpha"))
      .def_static("horizontal", &TargetMap::horizontal, py::arg("c0"), py::arg("c1"), py::arg("c2") = 0.0,
                  py::arg("c3") = 0.0)
      .def_static("eikonal", [](const V2& gamma) { return TargetMap::eikonal_distance(v2(gamma)); }, py::arg("gamma"))
      .def_property_readonly("name", &TargetMap::name)
      .def_property_readonly("params", &TargetMap::params)
      .def("S", [](const TargetMap& t, const V2& x) { const Vec2 s = t.S(v2(x)); return V2{s.x, s.y}; })
      .def("T", [](const TargetMap& t, const V2& x) { const Vec2 s = t.T(v2(x)); return V2{s.x, s.y}; });

  m.def(
      "admissibility",
      [](const TargetMap& map, const V2& lo, const V2& hi, int n, const std::string& patch, double tol) {
        return report_dict(admissibility(map, make_grid(lo, hi, n, n, patch), tol));
      },
      py::arg("map"), py::arg("lo"), py::arg("hi"), py::arg("n") = 41, py::arg("patch") = "box",
      py::arg("tol") = 1e-10);
  m.def(
      "existence_verdict",
      [](const TargetMap& map, const OpticalConstants& c, const V2& x0, std::optional<double> z0) {
        return report_dict(existence_verdict(map, c, v2(x0), z0 ? *z0 : default_z0(map, c, v2(x0))));
      },
      py::arg("map"), py::arg("constants"), py::arg("x0") = V2{0.0, 0.0}, py::arg("z0") = py::none());

  m.def(
      "solve_rho",
      [](const TargetMap& map, const OpticalConstants& c, const V2& lo, const V2& hi, int n, const std::string& patch,
         const V2& x0, std::optional<double> z0) {
        const LensDesign d = solve_rho(map, c, make_grid(lo, hi, n, n, patch), v2(x0), z0);
        py::dict out;
        out["x1"] = [&] {
          std::vector<double> v;
          for (int i = 0; i < d.grid.nx(); ++i) v.push_back(d.grid.x(i));
          return v;
        }();
        out["x2"] = [&] {
          std::vector<double> v;
          for (int j = 0; j < d.grid.ny(); ++j) v.push_back(d.grid.y(j));
          return v;
        }();
        out["rho"] = scalar_array(d.rho);
        out["z0"] = d.z0;
        out["path_residual"] = d.path_residual;
        return out;
      },
      py::arg("map"), py::arg("constants"), py::arg("lo"), py::arg("hi"), py::arg("n") = 101,
      py::arg("patch") = "box", py::arg("x0") = V2{0.0, 0.0}, py::arg("z0") = py::none(),
      "rho on an n x n grid, indexed [j, i]; NaN off the patch.");

  m.def(
      "trace_dilation",
      [](double alpha, const OpticalConstants& c, int n, std::size_t rays, const std::string& mode,
         unsigned long long seed) {
        const Grid2D grid({{-1.0, -1.0}, {1.0, 1.0}}, n, n, PatchShape::disk);
        const TargetMap map = TargetMap::dilation(alpha);
        const Lens lens = Lens::from_design(solve_rho(map, c, grid, {0.0, 0.0}));
        TraceOptions opt;
        opt.mode = parse_gradient_mode(mode);
        opt.target = map;
        const TraceReport r = trace_through(lens, sample_patch(grid, rays, seed), opt);
        return py::module_::import("json").attr("loads")(io::trace_summary(r).dump());
      },
      py::arg("alpha"), py::arg("constants"), py::arg("n") = 101, py::arg("rays") = 200,
      py::arg("mode") = "fd_phase", py::arg("seed") = 1, "Trace summary for a dilation lens over the unit disk.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "hybridlens");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
