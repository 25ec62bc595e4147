#include "hybridlens/maps.hpp"

#include <sstream>

#include "hybridlens/errors.hpp"

namespace hybridlens {

TargetMap TargetMap::from_displacement(std::string name, Displacement s, std::optional<Jacobian> ds,
                                       std::optional<Potential> potential, Box2 domain) {
  if (!s) throw InvalidArgument("TargetMap: displacement callback is empty");
  TargetMap m;
  m.name_ = std::move(name);
  m.s_ = std::move(s);
  m.ds_ = std::move(ds);
  m.potential_ = std::move(potential);
  m.domain_ = domain;
  return m;
}

TargetMap TargetMap::from_transform(std::string name, Displacement t, std::optional<Jacobian> dt, Box2 domain) {
  if (!t) throw InvalidArgument("TargetMap: transform callback is empty");
  TargetMap m;
  m.name_ = std::move(name);
  m.t_ = t;
  m.s_ = [t](const Vec2& x) { return t(x) - x; };
  if (dt) {
    m.ds_ = [dt = *dt](const Vec2& x) { return dt(x) - Mat2::identity(); };
  }
  m.domain_ = domain;
  return m;
}

TargetMap TargetMap::identity() {
  TargetMap m = from_displacement(
      "identity", [](const Vec2&) { return Vec2{}; }, [](const Vec2&) { return Mat2::zero(); },
      [](const Vec2&) { return 0.0; });
  return m;
}

TargetMap TargetMap::dilation(double alpha) {
  TargetMap m = from_displacement(
      "dilation", [alpha](const Vec2& x) { return x * alpha; },
      [alpha](const Vec2&) { return Mat2::diag(alpha, alpha); },
      [alpha](const Vec2& x) { return 0.5 * alpha * norm2(x); });
  m.params_ = {{"alpha", alpha}};
  return m;
}

TargetMap TargetMap::rotation(double alpha) {
  TargetMap m = from_displacement(
      "rotation", [alpha](const Vec2& x) { return Vec2{-alpha * x.y, alpha * x.x}; },
      [alpha](const Vec2&) { return Mat2::from(0.0, -alpha, alpha, 0.0); });
  m.params_ = {{"alpha", alpha}};
  return m;
}

TargetMap TargetMap::horizontal(double c0, double c1, double c2, double c3) {
  auto h = [=](double t) { return c0 + t * (c1 + t * (c2 + t * c3)); };
  auto dh = [=](double t) { return c1 + t * (2.0 * c2 + t * 3.0 * c3); };
  TargetMap m = from_displacement(
      "horizontal", [h](const Vec2& x) { return Vec2{h(x.x) - x.x, 0.0}; },
      [dh](const Vec2& x) { return Mat2::from(dh(x.x) - 1.0, 0.0, 0.0, 0.0); },
      [=](const Vec2& x) {
        const double t = x.x;
        return t * (c0 + t * ((c1 - 1.0) / 2.0 + t * (c2 / 3.0 + t * c3 / 4.0)));
      });
  m.params_ = {{"c0", c0}, {"c1", c1}, {"c2", c2}, {"c3", c3}};
  return m;
}

TargetMap TargetMap::eikonal_distance(const Vec2& gamma) {
  TargetMap m = from_displacement(
      "eikonal_distance",
      [gamma](const Vec2& x) {
        const Vec2 r = x - gamma;
        return r / norm(r);
      },
      [gamma](const Vec2& x) {
        const Vec2 r = x - gamma;
        const double len = norm(r);
        return Mat2::identity() * (1.0 / len) - outer(r, r) * (1.0 / (len * len * len));
      },
      [gamma](const Vec2& x) { return norm(x - gamma); });
  m.params_ = {{"gamma1", gamma.x}, {"gamma2", gamma.y}};
  return m;
}

Vec2 TargetMap::T(const Vec2& x) const {
  if (t_) return (*t_)(x);
  return x + s_(x);
}

Mat2 TargetMap::DS(const Vec2& x) const {
  if (ds_) return (*ds_)(x);
  return fd_jacobian(s_, x, FDStencil::gradient_default(x), domain_);
}

double TargetMap::potential(const Vec2& x) const {
  if (!potential_) throw InvalidArgument("map '" + name_ + "' has no potential");
  return (*potential_)(x);
}

Vec2 grad_norm2_S(const Vec2& s, const Mat2& ds) { return row_times(s, ds) * 2.0; }

ConditionReport admissibility(const TargetMap& map, const Grid2D& grid, double tol) {
  double max_curl = 0.0;
  double max_cross = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      const Vec2 x = grid.node(i, j);
      const Vec2 s = map.S(x);
      const Mat2 ds = map.DS(x);
      max_curl = std::max(max_curl, std::abs(scalar_curl(ds)));
      max_cross = std::max(max_cross, std::abs(cross2(s, grad_norm2_S(s, ds))));
    }
  }
  ConditionReport r;
  r.title = "admissibility of map '" + map.name() + "'";
  r.add({"curl_S", "∇×S", max_curl, tol, tol - max_curl, max_curl <= tol, "max over grid"});
  r.add({"S_cross_DS2", "S×D|S|²", max_cross, tol, tol - max_cross, max_cross <= tol, "max over grid"});
  return r;
}

EigenStructure eigen_structure(const TargetMap& map, const Vec2& x, double tol_fixed, double eig_tol) {
  const Vec2 s = map.S(x);
  const Mat2 ds = map.DS(x);
  const double s2 = norm2(s);
  if (std::sqrt(s2) <= tol_fixed) return FixedPoint{s, ds};
  const Vec2 sp = perp(s);
  EigenPair p;
  p.s = s;
  p.ds = ds;
  p.zeta = dot(s, ds * s) / s2;
  p.zeta_perp = dot(sp, ds * sp) / s2;
  p.residual = std::max(norm(ds * s - s * p.zeta), norm(ds * sp - sp * p.zeta_perp));
  if (p.residual > eig_tol * std::sqrt(s2)) {
    std::ostringstream msg;
    msg << "eigen_structure: S is not an eigenvector of DS at (" << x.x << ", " << x.y
        << "), residual " << p.residual;
    throw NotEigenvector(msg.str());
  }
  return p;
}

double default_tol_fixed(const Grid2D& grid) { return 1e-10 * grid.diameter(); }

}  // namespace hybridlens
