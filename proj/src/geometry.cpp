#include "hybridlens/geometry.hpp"

#include <string>

#include "hybridlens/errors.hpp"

namespace hybridlens {

UnitVec3::UnitVec3(const Vec3& v) : v_(v) {
  const double n = norm(v);
  if (!(std::abs(n - 1.0) <= kTolerance)) {
    throw InvalidArgument("UnitVec3: |v| = " + std::to_string(n) + " is not 1");
  }
}

UnitVec3 UnitVec3::normalize(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("UnitVec3::normalize: zero or non-finite vector");
  return UnitVec3(v / n, Unchecked{});
}

Mat2 Mat2::inverse() const {
  const double d = det();
  if (d == 0.0 || !std::isfinite(d)) throw SingularMatrix("Mat2::inverse: singular matrix");
  return from(e[1][1] / d, -e[0][1] / d, -e[1][0] / d, e[0][0] / d);
}

SymEigen2 sym_eigen(const Mat2& m) {
  const double a = m(0, 0);
  const double c = m(1, 1);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double mean = 0.5 * (a + c);
  const double r = std::hypot(0.5 * (a - c), b);
  // Rotation angle of the principal axis; atan2 keeps the basis orthonormal
  // and continuous through the isotropic case.
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  SymEigen2 out;
  out.lambda1 = mean + r;
  out.lambda2 = mean - r;
  out.v1 = {std::cos(theta), std::sin(theta)};
  out.v2 = perp(out.v1);
  return out;
}

FDStencil FDStencil::gradient_default(const Vec2& x) {
  const double h = std::max(1e-5, 1e-5 * norm(x));
  return {h, h, 2};
}

FDStencil FDStencil::hessian_default(const Vec2& x) {
  const double h = std::max(1e-3, 1e-3 * norm(x));
  return {h, h, 2};
}

void require_stencil_inside(const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  if (stencil.order != 2 && stencil.order != 4) throw InvalidArgument("FDStencil: order must be 2 or 4");
  if (!(stencil.h1 > 0.0) || !(stencil.h2 > 0.0)) throw InvalidArgument("FDStencil: steps must be positive");
  const Vec2 r = stencil.reach();
  if (!domain.contains(x - r) || !domain.contains(x + r) || !domain.contains({x.x - r.x, x.y + r.y}) ||
      !domain.contains({x.x + r.x, x.y - r.y})) {
    throw DomainViolation("finite-difference stencil at (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                          ") leaves the domain");
  }
}

namespace {

// First-derivative weights for offsets −2..2.
constexpr std::array<double, 5> kD1Order4{1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr std::array<double, 5> kD1Order2{0.0, -0.5, 0.0, 0.5, 0.0};
// Second-derivative weights for offsets −2..2.
constexpr std::array<double, 5> kD2Order4{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
constexpr std::array<double, 5> kD2Order2{0.0, 1.0, -2.0, 1.0, 0.0};

const std::array<double, 5>& d1_weights(int order) { return order == 4 ? kD1Order4 : kD1Order2; }
const std::array<double, 5>& d2_weights(int order) { return order == 4 ? kD2Order4 : kD2Order2; }

Vec2 axis_step(int axis, const FDStencil& s) { return axis == 0 ? Vec2{s.h1, 0.0} : Vec2{0.0, s.h2}; }
double axis_h(int axis, const FDStencil& s) { return axis == 0 ? s.h1 : s.h2; }

template <class F, class T>
T directional_first(const F& f, const Vec2& x, int axis, const FDStencil& s, T zero) {
  const auto& w = d1_weights(s.order);
  const Vec2 step = axis_step(axis, s);
  T acc = zero;
  for (int k = 0; k < 5; ++k) {
    if (w[k] == 0.0) continue;
    acc = acc + f(x + step * static_cast<double>(k - 2)) * w[k];
  }
  return acc / axis_h(axis, s);
}

}  // namespace

Vec2 fd_gradient(const ScalarFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  require_stencil_inside(x, stencil, domain);
  return {directional_first(f, x, 0, stencil, 0.0), directional_first(f, x, 1, stencil, 0.0)};
}

Mat2 fd_jacobian(const VectorFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  require_stencil_inside(x, stencil, domain);
  const Vec2 d1 = directional_first(f, x, 0, stencil, Vec2{});
  const Vec2 d2 = directional_first(f, x, 1, stencil, Vec2{});
  return Mat2::from(d1.x, d2.x, d1.y, d2.y);
}

Mat32 fd_jacobian(const Vector3Fn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  require_stencil_inside(x, stencil, domain);
  const Vec3 d1 = directional_first(f, x, 0, stencil, Vec3{});
  const Vec3 d2 = directional_first(f, x, 1, stencil, Vec3{});
  Mat32 m;
  for (int k = 0; k < 3; ++k) {
    m(k, 0) = d1[k];
    m(k, 1) = d2[k];
  }
  return m;
}

Mat2 fd_hessian(const ScalarFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  require_stencil_inside(x, stencil, domain);
  const auto& w2 = d2_weights(stencil.order);
  const auto& w1 = d1_weights(stencil.order);
  const double f0 = f(x);

  double diag[2];
  for (int axis = 0; axis < 2; ++axis) {
    const Vec2 step = axis_step(axis, stencil);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) {
      if (w2[k] == 0.0) continue;
      acc += w2[k] * (k == 2 ? f0 : f(x + step * static_cast<double>(k - 2)));
    }
    const double h = axis_h(axis, stencil);
    diag[axis] = acc / (h * h);
  }

  // Both nested orders ∂₁∂₂ and ∂₂∂₁ of the tensor-product stencil visit
  // the same points; accumulate them separately and average.
  double d12 = 0.0;
  double d21 = 0.0;
  for (int a = 0; a < 5; ++a) {
    if (w1[a] == 0.0) continue;
    for (int b = 0; b < 5; ++b) {
      if (w1[b] == 0.0) continue;
      const Vec2 p{x.x + (a - 2) * stencil.h1, x.y + (b - 2) * stencil.h2};
      const double fp = f(p);
      d12 += w1[a] * (w1[b] * fp);
      d21 += w1[b] * (w1[a] * fp);
    }
  }
  const double mixed = 0.5 * (d12 + d21) / (stencil.h1 * stencil.h2);
  return Mat2::from(diag[0], mixed, mixed, diag[1]);
}

double scalar_curl(const VectorFn2& a, const Vec2& x, const FDStencil& stencil, const Box2& domain) {
  return scalar_curl(fd_jacobian(a, x, stencil, domain));
}

}  // namespace hybridlens
