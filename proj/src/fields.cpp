#include "hybridlens/fields.hpp"

#include <sstream>

#include "hybridlens/errors.hpp"

namespace hybridlens {

IncidentField::IncidentField(std::string name, Direction e, std::optional<Jacobian> de, std::optional<Potential> h,
                             Box2 domain)
    : name_(std::move(name)), e_(std::move(e)), de_(std::move(de)), h_(std::move(h)), domain_(domain) {
  if (!e_) throw InvalidArgument("IncidentField: direction callback is empty");
}

IncidentField IncidentField::vertical() {
  IncidentField f(
      "vertical", [](const Vec2&) { return Vec3{0.0, 0.0, 1.0}; }, [](const Vec2&) { return Mat32{}; },
      [](const Vec2&) { return 0.0; });
  f.vertical_ = true;
  return f;
}

IncidentField IncidentField::collimated(const Vec3& e) {
  const Vec3 u = UnitVec3::normalize(e).vec();
  if (!(u.z > 0.0)) throw InvalidArgument("collimated field needs e3 > 0");
  return IncidentField(
      "collimated", [u](const Vec2&) { return u; }, [](const Vec2&) { return Mat32{}; },
      [u](const Vec2& x) { return u.x * x.x + u.y * x.y; });
}

IncidentField IncidentField::point_source(const Vec3& source) {
  if (!(source.z < 0.0)) throw InvalidArgument("point source must lie below the emitting plane (z < 0)");
  auto dir = [source](const Vec2& x) {
    const Vec3 r = lift(x, 0.0) - source;
    return r / norm(r);
  };
  auto jac = [source](const Vec2& x) {
    // ∂/∂x_i (r/|r|) = (E_i − e e_i)/|r| with E_i the i-th unit vector.
    const Vec3 r = lift(x, 0.0) - source;
    const double len = norm(r);
    const Vec3 e = r / len;
    Mat32 m;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 2; ++i) m(k, i) = ((k == i ? 1.0 : 0.0) - e[k] * e[i]) / len;
    return m;
  };
  auto pot = [source](const Vec2& x) { return norm(lift(x, 0.0) - source); };
  return IncidentField("point_source", dir, jac, pot);
}

IncidentField IncidentField::swirl(double scale) {
  auto dir = [scale](const Vec2& x) {
    const Vec2 t{-scale * x.y, scale * x.x};
    return Vec3{t.x, t.y, std::sqrt(1.0 - norm2(t))};
  };
  auto jac = [scale](const Vec2& x) {
    const double e3 = std::sqrt(1.0 - scale * scale * norm2(x));
    Mat32 m;
    m(0, 0) = 0.0;
    m(0, 1) = -scale;
    m(1, 0) = scale;
    m(1, 1) = 0.0;
    m(2, 0) = -scale * scale * x.x / e3;
    m(2, 1) = -scale * scale * x.y / e3;
    return m;
  };
  return IncidentField("swirl", dir, jac);
}

Mat32 IncidentField::jacobian(const Vec2& x) const {
  if (de_) return (*de_)(x);
  return fd_jacobian(e_, x, FDStencil::gradient_default(x), domain_);
}

double IncidentField::potential(const Vec2& x) const {
  if (!h_) throw InvalidArgument("field '" + name_ + "' has no potential; use recover_potential");
  return (*h_)(x);
}

ConditionReport curl_condition(const IncidentField& field, const Grid2D& grid, double tol) {
  double max_curl = 0.0;
  double max_norm_error = 0.0;
  double min_e3 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      const Vec2 x = grid.node(i, j);
      const Vec3 e = field.direction(x);
      max_norm_error = std::max(max_norm_error, std::abs(norm(e) - 1.0));
      min_e3 = std::min(min_e3, e.z);
      max_curl = std::max(max_curl, std::abs(scalar_curl(field.jacobian(x).top())));
    }
  }
  ConditionReport r;
  r.title = "curl condition on incident field '" + field.name() + "'";
  r.add({"curl_e", "∇×e′", max_curl, tol, tol - max_curl, max_curl <= tol, "max over grid"});
  r.add({"unit_field", "|e| = 1", max_norm_error, UnitVec3::kTolerance, UnitVec3::kTolerance - max_norm_error,
         max_norm_error <= UnitVec3::kTolerance, "max | |e| - 1 |"});
  r.add({"e3_positive", "e₃ > 0", min_e3, 0.0, min_e3, min_e3 > 0.0, "min over grid"});
  return r;
}

PotentialResult recover_potential(const IncidentField& field, const Grid2D& grid, const Vec2& basepoint,
                                  std::optional<double> tol, int panels) {
  const double t = tol.value_or(1e-7 * grid.diameter());
  VectorFn2 omega = [&field](const Vec2& x) { return field.direction(x).xy(); };
  PotentialResult out;
  out.h = integrate_one_form(grid, omega, basepoint, Axis::x1, panels);
  const ScalarGrid other = integrate_one_form(grid, omega, basepoint, Axis::x2, panels);
  out.threshold = 10.0 * t;
  for (std::size_t n = 0; n < out.h.values.size(); ++n) {
    const double a = out.h.values[n];
    const double b = other.values[n];
    if (std::isnan(a) != std::isnan(b)) throw NotIntegrable("recover_potential: path orders reach different nodes");
    if (!std::isnan(a)) out.path_residual = std::max(out.path_residual, std::abs(a - b));
  }
  if (out.path_residual > out.threshold) {
    std::ostringstream msg;
    msg << "recover_potential: staircase paths disagree by " << out.path_residual << " > " << out.threshold;
    throw NotIntegrable(msg.str());
  }
  return out;
}

}  // namespace hybridlens
