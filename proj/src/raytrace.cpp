#include "hybridlens/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hybridlens/errors.hpp"
#include "hybridlens/parallel.hpp"

namespace hybridlens {

Lens Lens::build(const IncidentField& field, const Surface& graph, const OpticalConstants& constants,
                 const Grid2D& grid, const Vec2& x0) {
  constants.validate_lens();
  Lens lens;
  lens.field = field;
  lens.graph = graph;
  lens.rho = path_length_surface(graph, field, constants.a);
  lens.constants = constants;
  lens.x0 = x0;
  const MidField mf = field.is_vertical() ? midfield_vertical(lens.rho, constants, grid)
                                          : midfield_general(field, lens.rho, constants, grid);
  lens.phase = build_phase(field, lens.rho, mf, constants, x0);
  return lens;
}

Lens Lens::from_design(const LensDesign& design) {
  return build(IncidentField::vertical(), Surface::from_design(design), design.constants, design.grid, design.x0);
}

const char* to_string(GradientMode mode) { return mode == GradientMode::analytic ? "analytic" : "fd_phase"; }

GradientMode parse_gradient_mode(const std::string& s) {
  if (s == "analytic") return GradientMode::analytic;
  if (s == "fd" || s == "fd_phase") return GradientMode::fd_phase;
  throw InvalidArgument("unknown gradient mode '" + s + "' (expected analytic or fd)");
}

namespace {

// x′ with Q(x′) = u by Newton's method from a starting guess.
Vec2 invert_footprint(const Lens& lens, const Vec2& u, Vec2 x) {
  auto Q = [&](const Vec2& p) { return midfield_at(lens.field, lens.rho, lens.constants, p).Q; };
  const double tol = 1e-14 * std::max(1.0, norm(u));
  for (int it = 0; it < 50; ++it) {
    const Vec2 r = Q(x) - u;
    if (norm(r) <= tol) return x;
    const Mat2 dq = fd_jacobian(VectorFn2(Q), x, FDStencil::uniform(1e-6, 2));
    const Vec2 step = dq.inverse() * r;
    x -= step;
    if (norm(step) <= 1e-15 * std::max(1.0, norm(x))) return x;
  }
  const Vec2 r = Q(x) - u;
  if (norm(r) <= 1e3 * tol) return x;
  std::ostringstream msg;
  msg << "cannot invert the footprint at u = (" << u.x << ", " << u.y << ")";
  throw MissedSurface(msg.str());
}

}  // namespace

TraceReport trace_through(const Lens& lens, const std::vector<Vec2>& samples, const TraceOptions& options) {
  const OpticalConstants& c = lens.constants;
  c.validate_lens();
  const double kappa1 = c.kappa1();
  std::optional<PhaseInterpolator> interp;
  if (options.mode == GradientMode::fd_phase) interp.emplace(lens.phase, options.gradient_scale);

  TraceReport report;
  report.mode = options.mode;
  std::vector<std::optional<RayRecord>> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t n) {
    RayRecord r;
    r.x = samples[n];
    r.e = lens.field.direction(r.x);
    const UnitVec3 e = UnitVec3::normalize(r.e);
    double t = 0.0;
    if (lens.field.is_vertical()) {
      try {
        t = lens.graph.value(r.x);
      } catch (const DomainViolation& err) {
        throw MissedSurface(std::string("ray misses the lens: ") + err.what());
      }
    } else {
      t = ray_graph_distance(lens.graph, r.x, r.e, c.a / r.e.z, 1e-12 * c.a);
    }
    r.hit = lift(r.x, 0.0) + e.vec() * t;
    if (!(r.hit.z > 0.0 && r.hit.z < c.a)) {
      std::ostringstream msg;
      msg << "hit height " << r.hit.z << " outside (0, a) for x = (" << r.x.x << ", " << r.x.y << ")";
      throw MissedSurface(msg.str());
    }
    const Vec2 dg = lens.graph.gradient(r.hit.xy());
    const UnitVec3 nu = UnitVec3::normalize(lift(-dg, 1.0));
    r.nu = nu.vec();
    const UnitVec3 m = refract_standard(e, nu, kappa1).m;
    r.m = m.vec();
    r.snell_residual = norm(cross3(e.vec(), r.nu) - cross3(r.m, r.nu) * kappa1);
    r.u = r.hit.xy() + r.m.xy() * ((c.a - r.hit.z) / r.m.z);

    if (options.mode == GradientMode::analytic) {
      const Vec2 xs = invert_footprint(lens, r.u, r.x);
      r.grad_phi = midfield_at(lens.field, lens.rho, c, xs).m.xy() * (c.k * options.gradient_scale);
    } else {
      const auto g = interp->gradient(r.u);
      if (!g) {
        std::ostringstream msg;
        msg << "metasurface point (" << r.u.x << ", " << r.u.y << ") is outside the phase footprint";
        throw MissedSurface(msg.str());
      }
      r.grad_phi = *g;
    }
    const UnitVec3 w = refract_metasurface(m, UnitVec3({0.0, 0.0, 1.0}), c.kappa2(), lift(r.grad_phi, 0.0), c.k).m;
    r.exit = w.vec();
    r.landing = r.u + r.exit.xy() * ((c.c - c.a) / r.exit.z);
    r.direction_error = norm(r.exit - Vec3{0.0, 0.0, 1.0});
    if (options.target) {
      r.target = options.target->T(r.x);
      r.landing_error = norm(r.landing - r.target);
    }
    out[n] = r;
  });

  report.rays.reserve(out.size());
  for (auto& r : out) report.rays.push_back(*r);
  if (!report.rays.empty()) {
    double sum_dir = 0.0, sum_land = 0.0, max_land = 0.0;
    for (const auto& r : report.rays) {
      report.max_direction_error = std::max(report.max_direction_error, r.direction_error);
      report.max_snell_residual = std::max(report.max_snell_residual, r.snell_residual);
      sum_dir += r.direction_error;
      sum_land += r.landing_error;
      max_land = std::max(max_land, r.landing_error);
    }
    const double n = static_cast<double>(report.rays.size());
    report.mean_direction_error = sum_dir / n;
    if (options.target) {
      report.max_landing_error = max_land;
      report.mean_landing_error = sum_land / n;
    }
  }
  return report;
}

SpotDiagram spot_diagram(const TraceReport& report) {
  if (report.rays.empty()) throw InvalidArgument("spot_diagram: empty report");
  SpotDiagram s;
  for (const auto& r : report.rays) s.centroid += r.landing;
  s.centroid = s.centroid / static_cast<double>(report.rays.size());
  std::vector<double> radii;
  radii.reserve(report.rays.size());
  double sq = 0.0;
  for (const auto& r : report.rays) {
    SpotRow row{r.x, r.landing, r.target, 0.0};
    row.radius = std::isnan(r.landing_error) ? norm(r.landing - s.centroid) : r.landing_error;
    radii.push_back(row.radius);
    sq += row.radius * row.radius;
    s.rows.push_back(row);
  }
  s.rms_radius = std::sqrt(sq / static_cast<double>(radii.size()));
  std::sort(radii.begin(), radii.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(radii.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, radii.size() - 1);
    return radii[lo] + (radii[hi] - radii[lo]) * (pos - static_cast<double>(lo));
  };
  s.p50 = q(0.5);
  s.p90 = q(0.9);
  s.p99 = q(0.99);
  s.max_radius = radii.back();
  return s;
}

std::vector<Vec2> sample_patch(const Grid2D& grid, std::size_t n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(grid.box().lo.x, grid.box().hi.x);
  std::uniform_real_distribution<double> uy(grid.box().lo.y, grid.box().hi.y);
  std::vector<Vec2> out;
  out.reserve(n);
  std::size_t guard = 0;
  while (out.size() < n) {
    if (++guard > 1000 * n + 1000) throw InvalidArgument("sample_patch: the patch has no covered cells");
    const Vec2 p{ux(rng), uy(rng)};
    if (grid.locate(p)) out.push_back(p);
  }
  return out;
}

}  // namespace hybridlens
