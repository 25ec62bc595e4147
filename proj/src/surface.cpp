#include "hybridlens/surface.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "hybridlens/errors.hpp"
#include "hybridlens/imaging.hpp"

namespace hybridlens {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// Cubic Hermite basis on [0, 1] and its first two derivatives.
// h[0]: value at 0, h[1]: value at 1, h[2]: slope at 0, h[3]: slope at 1.
struct Hermite {
  double v[4];
  double d1[4];
  double d2[4];
};

Hermite hermite(double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  Hermite h{};
  h.v[0] = 2 * s3 - 3 * s2 + 1;
  h.v[1] = -2 * s3 + 3 * s2;
  h.v[2] = s3 - 2 * s2 + s;
  h.v[3] = s3 - s2;
  h.d1[0] = 6 * s2 - 6 * s;
  h.d1[1] = -6 * s2 + 6 * s;
  h.d1[2] = 3 * s2 - 4 * s + 1;
  h.d1[3] = 3 * s2 - 2 * s;
  h.d2[0] = 12 * s - 6;
  h.d2[1] = -12 * s + 6;
  h.d2[2] = 6 * s - 4;
  h.d2[3] = 6 * s - 2;
  return h;
}

}  // namespace

double Poly2::operator()(const Vec2& x) const {
  double out = 0.0;
  for (const auto& [pq, c] : coeffs) out += c * ipow(x.x, pq.first) * ipow(x.y, pq.second);
  return out;
}

SurfaceJet Poly2::jet(const Vec2& x) const {
  SurfaceJet j;
  for (const auto& [pq, c] : coeffs) {
    const int p = pq.first;
    const int q = pq.second;
    const double xp = ipow(x.x, p);
    const double yq = ipow(x.y, q);
    j.value += c * xp * yq;
    if (p >= 1) j.grad.x += c * p * ipow(x.x, p - 1) * yq;
    if (q >= 1) j.grad.y += c * q * xp * ipow(x.y, q - 1);
    if (p >= 2) j.hess(0, 0) += c * p * (p - 1) * ipow(x.x, p - 2) * yq;
    if (q >= 2) j.hess(1, 1) += c * q * (q - 1) * xp * ipow(x.y, q - 2);
    if (p >= 1 && q >= 1) {
      const double m = c * p * q * ipow(x.x, p - 1) * ipow(x.y, q - 1);
      j.hess(0, 1) += m;
      j.hess(1, 0) += m;
    }
  }
  return j;
}

int Poly2::degree() const {
  int d = 0;
  for (const auto& [pq, c] : coeffs)
    if (c != 0.0) d = std::max(d, pq.first + pq.second);
  return d;
}

Surface::Surface(std::string name, JetFn jet, Box2 domain, bool analytic)
    : name_(std::move(name)), jet_(std::move(jet)), domain_(domain), analytic_(analytic) {
  if (!jet_) throw InvalidArgument("Surface: empty jet function");
}

Surface Surface::from_function(std::string name, ScalarFn2 f, Box2 domain) {
  if (!f) throw InvalidArgument("Surface::from_function: empty function");
  auto jet = [f, domain](const Vec2& x) {
    SurfaceJet j;
    j.value = f(x);
    j.grad = fd_gradient(f, x, FDStencil::gradient_default(x), domain);
    j.hess = fd_hessian(f, x, FDStencil::hessian_default(x), domain);
    return j;
  };
  return Surface(std::move(name), jet, domain, false);
}

Surface Surface::flat(double r0) {
  return Surface("flat", [r0](const Vec2&) { return SurfaceJet{r0, {}, Mat2::zero()}; });
}

Surface Surface::plane(double r0, const Vec2& slope) {
  return Surface("plane", [r0, slope](const Vec2& x) { return SurfaceJet{r0 + dot(slope, x), slope, Mat2::zero()}; });
}

Surface Surface::quadratic(double r0, const Vec2& g, const Mat2& H) {
  const Mat2 hs = H.sym();
  return Surface("quadratic", [r0, g, hs](const Vec2& x) {
    const Vec2 hx = hs * x;
    return SurfaceJet{r0 + dot(g, x) + 0.5 * dot(x, hx), g + hx, hs};
  });
}

Surface Surface::polynomial(Poly2 p, std::string name) {
  return Surface(std::move(name), [p = std::move(p)](const Vec2& x) { return p.jet(x); });
}

Surface Surface::from_design(const LensDesign& design) {
  const Grid2D g = design.grid;
  const ScalarGrid rho = design.rho;
  const VectorGrid drho = design.drho;
  const GridField<Mat2> d2rho = design.d2rho;
  auto jet = [g, rho, drho, d2rho](const Vec2& x) {
    const auto cell = g.locate(x);
    if (!cell) {
      // Active rim nodes of a disk patch carry data but no complete cell.
      const auto [ni, nj] = g.nearest_node(x);
      if (ni >= 0 && nj >= 0 && g.active(ni, nj) && g.node(ni, nj) == x)
        return SurfaceJet{rho.at(ni, nj), drho.at(ni, nj), d2rho.at(ni, nj)};

      std::ostringstream msg;
      msg << "design surface: (" << x.x << ", " << x.y << ") is outside the covered cells";
      throw DomainViolation(msg.str());
    }
    const int i = cell->i;
    const int j = cell->j;
    const double hx = g.x(i + 1) - g.x(i);
    const double hy = g.y(j + 1) - g.y(j);
    const Hermite bs = hermite(cell->s);
    const Hermite bt = hermite(cell->t);
    SurfaceJet out;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double f = rho.at(i + a, j + b);
        const Vec2 df = drho.at(i + a, j + b);
        const double fxy = d2rho.at(i + a, j + b)(0, 1);
        // Coefficients against the four tensor basis products.
        const double c[4] = {f, hx * df.x, hy * df.y, hx * hy * fxy};
        const int us[4] = {a, 2 + a, a, 2 + a};
        const int vs[4] = {b, b, 2 + b, 2 + b};
        for (int k = 0; k < 4; ++k) {
          const int u = us[k];
          const int v = vs[k];
          out.value += c[k] * bs.v[u] * bt.v[v];
          out.grad.x += c[k] * bs.d1[u] * bt.v[v] / hx;
          out.grad.y += c[k] * bs.v[u] * bt.d1[v] / hy;
          out.hess(0, 0) += c[k] * bs.d2[u] * bt.v[v] / (hx * hx);
          out.hess(1, 1) += c[k] * bs.v[u] * bt.d2[v] / (hy * hy);
          out.hess(0, 1) += c[k] * bs.d1[u] * bt.d1[v] / (hx * hy);
        }
      }
    }
    out.hess(1, 0) = out.hess(0, 1);
    return out;
  };
  return Surface("design", jet, g.box(), true);
}

double ray_graph_distance(const Surface& graph, const Vec2& x, const Vec3& e, double t_max, double tol) {
  if (!(e.z > 0.0)) throw InvalidArgument("ray_graph_distance: need e3 > 0");
  auto miss = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "ray from (" << x.x << ", " << x.y << ") misses the surface: " << why;
    return MissedSurface(msg.str());
  };
  auto g = [&](double t) {
    try {
      return t * e.z - graph.value(x + e.xy() * t);
    } catch (const DomainViolation& err) {
      throw miss(err.what());
    }
  };
  if (e.x == 0.0 && e.y == 0.0) {
    const double t = graph.value(x) / e.z;
    if (!(t > 0.0) || !(t < t_max)) throw miss("surface height outside (0, a)");
    return t;
  }
  const double g0 = g(0.0);
  const double g1 = g(t_max);
  if (g0 == 0.0) return 0.0;
  if (!(g0 < 0.0 && g1 > 0.0)) throw miss("no sign change on [0, a/e3]");
  std::uintmax_t iters = 200;
  auto stop = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol; };
  const auto r = boost::math::tools::toms748_solve(g, 0.0, t_max, g0, g1, stop, iters);
  return 0.5 * (r.first + r.second);
}

Surface path_length_surface(const Surface& graph, const IncidentField& field, double a) {
  if (field.is_vertical()) return graph;
  auto grad_at = [graph, field, a](const Vec2& x, double* value) {
    const Vec3 e = field.direction(x);
    const double t = ray_graph_distance(graph, x, e, a / e.z, 1e-14 * a);
    const Mat32 de = field.jacobian(x);
    const Vec2 dg = graph.gradient(x + e.xy() * t);
    const double ft = e.z - dot(dg, e.xy());
    if (!(std::abs(ft) > 0.0)) throw SingularMatrix("path_length_surface: ray tangent to the graph");
    Vec2 grad;
    for (int i = 0; i < 2; ++i) {
      const Vec2 unit = i == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
      const Vec2 dy = unit + Vec2{de(0, i), de(1, i)} * t;
      const double fi = t * de(2, i) - dot(dg, dy);
      grad[i] = -fi / ft;
    }
    if (value) *value = t;
    return grad;
  };
  auto jet = [grad_at](const Vec2& x) {
    SurfaceJet j;
    j.grad = grad_at(x, &j.value);
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
      const Vec2 step = i == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
      const Vec2 d = (grad_at(x + step, nullptr) - grad_at(x - step, nullptr)) / (2.0 * h);
      j.hess(0, i) = d.x;
      j.hess(1, i) = d.y;
    }
    j.hess = j.hess.sym();
    return j;
  };
  return Surface(graph.name() + "@path", jet, graph.domain(), false);
}

}  // namespace hybridlens
