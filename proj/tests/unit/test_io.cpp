#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <fstream>
#include <random>

#include "hybridlens/config.hpp"
#include "hybridlens/errors.hpp"
#include "hybridlens/io.hpp"

using namespace hybridlens;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hybridlens_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0 || (std::isnan(a) && std::isnan(b)); }

}  // namespace

TEST(Format, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(1.0), "1");
  EXPECT_EQ(io::format_double(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(io::format_double(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(io::format_short(0.3), "0.3");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, 40.0 * u(rng));
    EXPECT_EQ(io::parse_double(io::format_double(v)), v);
  }
  EXPECT_TRUE(std::isnan(io::parse_double(io::format_double(kNaN))));
  EXPECT_THROW(io::parse_double("1.5x"), InvalidArgument);
  EXPECT_THROW(io::parse_double(""), InvalidArgument);
}

TEST(Format, IgnoresGlobalLocale) {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") == nullptr) std::setlocale(LC_NUMERIC, "fr_FR.UTF-8");
  EXPECT_EQ(io::format_double(1.25), "1.25");
  EXPECT_EQ(io::parse_double("1.25"), 1.25);
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST(Csv, WriteRead) {
  const fs::path dir = scratch("csv");
  io::CsvWriter w(dir / "t.csv", {"a", "b"});
  w.row({1.0, 0.1});
  w.row({kNaN, -3.0});
  EXPECT_THROW(w.row({1.0}), InvalidArgument);
  w.close();
  EXPECT_EQ(slurp(dir / "t.csv"), "a,b\n1,0.10000000000000001\nnan,-3\n");
  const io::CsvTable t = io::read_csv(dir / "t.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_EQ(t.rows[0][1], 0.1);
  EXPECT_TRUE(std::isnan(t.rows[1][0]));
  EXPECT_THROW(t.column("c"), InvalidArgument);
}

TEST(Design, RoundTripIsBitEqual) {
  OpticalConstants c;
  const Grid2D g({{-1.0, -1.0}, {1.0, 1.0}}, 41, 41, PatchShape::disk);
  const LensDesign d = solve_rho(TargetMap::dilation(0.2), c, g, {0.0, 0.0});
  const fs::path dir = scratch("design");
  io::write_design(d, dir);
  const LensDesign r = io::read_design(dir);
  EXPECT_TRUE(r.grid == d.grid);
  EXPECT_EQ(r.map.name(), "dilation");
  EXPECT_EQ(r.map.params(), d.map.params());
  EXPECT_EQ(r.constants.n2, c.n2);
  EXPECT_TRUE(same_bits(r.z0, d.z0));
  EXPECT_TRUE(same_bits(r.path_residual, d.path_residual));
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_TRUE(same_bits(r.rho.values[k], d.rho.values[k]));
    EXPECT_TRUE(same_bits(r.z.values[k], d.z.values[k]));
    EXPECT_TRUE(same_bits(r.drho.values[k].x, d.drho.values[k].x));
    EXPECT_TRUE(same_bits(r.drho.values[k].y, d.drho.values[k].y));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_TRUE(same_bits(r.d2rho.values[k](i, j), d.d2rho.values[k](i, j)));
  }
  // Writing the reloaded design reproduces the files byte for byte.
  const fs::path again = scratch("design_again");
  io::write_design(r, again);
  EXPECT_EQ(slurp(dir / "rho.csv"), slurp(again / "rho.csv"));
  EXPECT_EQ(slurp(dir / "design.json"), slurp(again / "design.json"));
}

TEST(Design, CallbackMapsAreNotSaved) {
  const TargetMap m = TargetMap::from_displacement("custom", [](const Vec2& x) { return x * 0.1; });
  const Grid2D g({{-0.2, -0.2}, {0.2, 0.2}}, 5, 5);
  const LensDesign d = solve_rho(m, OpticalConstants{}, g, {0.0, 0.0});
  EXPECT_THROW(io::write_design(d, scratch("custom")), InvalidArgument);
}

TEST(Config, ParsesFullDocument) {
  const DesignConfig c = parse_config_text(R"({
    "constants": {"n1": 1.0, "n2": 1.5, "a": 1.0, "c": 2.0},
    "map": {"name": "horizontal", "c0": 0.1, "c1": 1.2},
    "grid": {"lo": [-1, -1], "hi": [1, 1], "n": [11, 21], "patch": "disk"},
    "x0": [0.1, 0.0], "z0": 0.5,
    "tolerances": {"check": 1e-9, "landing": 1e-4, "substeps": 2},
    "trace": {"samples": 10, "seed": 4, "gradient_mode": "analytic"},
    "output_dir": "somewhere"
  })");
  ASSERT_TRUE(c.map && c.grid);
  EXPECT_EQ(c.map->params.at("c2"), 0.0);
  EXPECT_EQ(c.grid->nx, 11);
  EXPECT_EQ(c.grid->ny, 21);
  EXPECT_EQ(c.grid->patch, PatchShape::disk);
  EXPECT_EQ(c.basepoint(), (Vec2{0.1, 0.0}));
  EXPECT_EQ(*c.tolerances.landing, 1e-4);
  EXPECT_EQ(c.tolerances.substeps, 2);
  EXPECT_EQ(c.trace.mode, GradientMode::analytic);
  EXPECT_EQ(c.output_dir, fs::path("somewhere"));
  EXPECT_EQ(c.map->build().T({1.0, 2.0}), (Vec2{1.3, 2.0}));
}

TEST(Config, FieldAndSurface) {
  const DesignConfig c = parse_config_text(R"({
    "field": {"name": "point_source", "source": [0, 0, -2]},
    "surface": {"name": "polynomial", "coeffs": [[0, 0, 0.4], [2, 0, -0.1], [1, 1, 0.05]]},
    "grid": {"lo": [-0.3, -0.3], "hi": [0.3, 0.3]}
  })");
  EXPECT_EQ(c.grid->nx, 201);
  const Surface s = c.surface->build();
  EXPECT_DOUBLE_EQ(s.value({1.0, 2.0}), 0.4 - 0.1 + 0.1);
  EXPECT_EQ(c.field->build().name(), "point_source");
}

TEST(Config, RejectsBadDocuments) {
  const char* bad[] = {
      "{",                                                       // malformed
      "[]",                                                      // not an object
      R"({"colour": 1})",                                        // unknown top-level key
      R"({"map": {"name": "dilation", "alpha": 0.2, "beta": 1}})",  // unknown nested key
      R"({"map": {"name": "dilation"}})",                        // missing parameter
      R"({"map": {"name": "shear", "alpha": 1}})",               // unknown map
      R"({"constants": {"n1": 1.5, "n2": 1.0}})",                // kappa1 < 1
      R"({"constants": {"a": 2.0, "c": 1.0}})",                  // c < a
      R"({"grid": {"lo": [1, 0], "hi": [0, 1]}})",               // empty box
      R"({"grid": {"lo": [0, 0], "hi": [1, 1], "n": 1}})",       // too few nodes
      R"({"grid": {"lo": [0, 0], "hi": [1, 1], "n": 2.5}})",     // not an integer
      R"({"grid": {"lo": [0, 0], "hi": [1, 1], "patch": "hex"}})",
      R"({"z0": 1.5})",                                          // z0 ≥ a
      R"({"x0": [5, 5], "grid": {"lo": [0, 0], "hi": [1, 1]}})",  // x0 outside
      R"({"trace": {"gradient_mode": "spline"}})",
      R"({"map": {"name": "identity"}, "field": {"name": "vertical"}})",
      R"({"surface": {"name": "flat", "r0": 0.5}})",             // surface without field
      R"({"field": {"name": "collimated", "direction": [1, 0, -1]}})",
      R"({"plot2d": {"alphas": [], "z0": 0.5, "t": [0, 1]}})",
      R"({"plot2d": {"alphas": [0.1], "z0": 0.5, "t": [0.5, 1]}})",
      R"({"x0": [0, "a"]})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config_text(text), ConfigError) << text;
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Report, JsonNamesFailingConditions) {
  ConditionReport r;
  r.title = "t";
  r.add({"a", "first", 1.0, 0.5, -0.5, false, ""});
  r.add({"b", "second", kNaN, 0.5, kNaN, true, ""});
  const io::json j = io::to_json(r);
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_EQ(j["failing"][0], "first");
  EXPECT_EQ(j["entries"][1]["value"], "nan");
}
