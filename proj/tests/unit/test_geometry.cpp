#include <gtest/gtest.h>

#include <random>

#include "hybridlens/errors.hpp"
#include "hybridlens/geometry.hpp"

using namespace hybridlens;

TEST(Geometry, ScalarCurlOfRotationIsTwo) {
  VectorFn2 a = [](const Vec2& x) { return Vec2{-x.y, x.x}; };
  for (Vec2 x : {Vec2{0, 0}, Vec2{0.3, -1.7}, Vec2{5, 2}})
    EXPECT_NEAR(scalar_curl(a, x, FDStencil::gradient_default(x)), 2.0, 1e-9);
}

TEST(Geometry, ScalarCurlOfGradientVanishes) {
  // h = x1^2 x2
  VectorFn2 grad = [](const Vec2& x) { return Vec2{2 * x.x * x.y, x.x * x.x}; };
  EXPECT_NEAR(scalar_curl(grad, {1, 1}, FDStencil::gradient_default({1, 1})), 0.0, 1e-9);
}

TEST(Geometry, ScalarCurlHandWorked) {
  VectorFn2 a = [](const Vec2& x) { return Vec2{x.y * x.y, 0.0}; };
  // ∂1 a2 − ∂2 a1 = −2 x2; oracle from an independent forward difference
  const double h = 1e-6;
  const double oracle = -((1.0 + h) * (1.0 + h) - 1.0) / h;
  const double v = scalar_curl(a, {0, 1}, FDStencil::gradient_default({0, 1}));
  EXPECT_NEAR(v, -2.0, 1e-9);
  EXPECT_NEAR(v, oracle, 1e-5);
}

TEST(Geometry, ScalarCurlRejectsStencilOutsideDomain) {
  VectorFn2 a = [](const Vec2& x) { return x; };
  Box2 dom{{0, 0}, {1, 1}};
  EXPECT_THROW(scalar_curl(a, {0, 0.5}, FDStencil::gradient_default({0, 0.5}), dom), DomainViolation);
}

TEST(Geometry, Cross) {
  EXPECT_EQ(cross2({1, 0}, {0, 1}), 1.0);
  EXPECT_EQ(cross2({0.3, 0.7}, {0.3, 0.7}), 0.0);
  EXPECT_EQ(cross3({1, 0, 0}, {0, 1, 0}), (Vec3{0, 0, 1}));
}

TEST(Geometry, FdHessian) {
  ScalarFn2 f = [](const Vec2& x) { return x.x * x.x + 3 * x.y * x.y; };
  Mat2 h = fd_hessian(f, {0.4, -0.2}, FDStencil::hessian_default({0.4, -0.2}));
  EXPECT_NEAR(h(0, 0), 2.0, 1e-9);
  EXPECT_NEAR(h(1, 1), 6.0, 1e-9);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-9);

  ScalarFn2 c = [](const Vec2&) { return 4.25; };
  EXPECT_EQ(fd_hessian(c, {1, 2}, FDStencil::hessian_default({1, 2})).frobenius(), 0.0);

  ScalarFn2 g = [](const Vec2& x) { return x.x * x.y; };
  Mat2 hg = fd_hessian(g, {0, 0}, FDStencil::hessian_default({0, 0}));
  EXPECT_NEAR(hg(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(hg(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(hg(1, 0), 1.0, 1e-9);
  EXPECT_NEAR(hg(1, 1), 0.0, 1e-9);
}

TEST(Geometry, FdExactOnPolynomials) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int n = 0; n < 50; ++n) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng);
    ScalarFn2 q = [=](const Vec2& x) { return a * x.x * x.x + b * x.x * x.y + c * x.y * x.y + d * x.x + e * x.y; };
    const Vec2 x{u(rng), u(rng)};
    const Vec2 g = fd_gradient(q, x, FDStencil::gradient_default(x));
    const Vec2 ge{2 * a * x.x + b * x.y + d, b * x.x + 2 * c * x.y + e};
    EXPECT_LE(norm(g - ge), 1e-9 * std::max(1.0, norm(ge)));
    const Mat2 h = fd_hessian(q, x, FDStencil::hessian_default(x));
    const Mat2 he = Mat2::from(2 * a, b, b, 2 * c);
    EXPECT_LE((h - he).frobenius(), 1e-9 * std::max(1.0, he.frobenius()));
    // quartic stencil on a cubic
    ScalarFn2 cub = [=](const Vec2& x) { return a * x.x * x.x * x.x + b * x.x * x.y * x.y + c * x.y; };
    const Vec2 gc = fd_gradient(cub, x, FDStencil::uniform(1e-3, 4));
    const Vec2 gce{3 * a * x.x * x.x + b * x.y * x.y, 2 * b * x.x * x.y + c};
    EXPECT_LE(norm(gc - gce), 1e-9 * std::max(1.0, norm(gce)));
  }
}

TEST(Geometry, OuterAndRowConvention) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int n = 0; n < 100; ++n) {
    Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, w{u(rng), u(rng)};
    const Mat2 o = outer(a, b);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_EQ(o(i, j), a[i] * b[j]);
    EXPECT_LE(norm(o * w - a * dot(b, w)), 1e-14 * (1 + norm(a) * norm(b) * norm(w)));
  }
}

TEST(Geometry, SymmetricEigen) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int n = 0; n < 1000; ++n) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const Mat2 m = Mat2::from(a, b, b, c);
    const SymEigen2 e = sym_eigen(m);
    EXPECT_GE(e.lambda1, e.lambda2);
    EXPECT_NEAR(norm(e.v1), 1.0, 1e-14);
    EXPECT_NEAR(dot(e.v1, e.v2), 0.0, 1e-14);
    EXPECT_LE(norm(m * e.v1 - e.v1 * e.lambda1), 1e-12 * std::max(1.0, m.frobenius()));
    EXPECT_LE(norm(m * e.v2 - e.v2 * e.lambda2), 1e-12 * std::max(1.0, m.frobenius()));
    const Mat2 r = outer(e.v1, e.v1) * e.lambda1 + outer(e.v2, e.v2) * e.lambda2;
    EXPECT_LE((r - m).frobenius(), 1e-12 * std::max(1.0, m.frobenius()));
  }
  const SymEigen2 d = sym_eigen(Mat2::diag(2, 2));
  EXPECT_EQ(d.lambda1, 2.0);
  EXPECT_EQ(d.lambda2, 2.0);
}

TEST(Geometry, UnitVecChecksNorm) {
  EXPECT_NO_THROW(UnitVec3(Vec3{0, 0, 1}));
  EXPECT_THROW(UnitVec3(Vec3{0, 0, 1.001}), InvalidArgument);
  EXPECT_THROW(UnitVec3::normalize({0, 0, 0}), InvalidArgument);
  EXPECT_NEAR(norm(UnitVec3::normalize({3, 4, 12}).vec()), 1.0, 1e-15);
}

TEST(Geometry, InverseAndSingular) {
  const Mat2 m = Mat2::from(2, 1, 1, 3);
  const Mat2 p = m * m.inverse();
  EXPECT_NEAR((p - Mat2::identity()).frobenius(), 0.0, 1e-15);
  EXPECT_THROW(Mat2::from(1, 2, 2, 4).inverse(), SingularMatrix);
}
