#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybridlens/errors.hpp"
#include "hybridlens/farfield.hpp"
#include "hybridlens/imaging.hpp"

using namespace hybridlens;

namespace {

OpticalConstants lens() {
  OpticalConstants c;
  c.n1 = 1.0;
  c.n2 = 1.5;
  c.n3 = 1.0;
  c.k = 2.0;
  c.a = 1.0;
  c.c = 2.0;
  return c;
}

Surface bowl() {
  Poly2 p;
  p.coeffs[{0, 0}] = 0.3;
  p.coeffs[{1, 0}] = 0.02;
  p.coeffs[{2, 0}] = 0.2;
  p.coeffs[{1, 1}] = 0.05;
  p.coeffs[{0, 2}] = -0.15;
  p.coeffs[{2, 2}] = 0.1;
  p.coeffs[{4, 0}] = -0.05;
  return Surface::polynomial(p, "bowl");
}

double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

}  // namespace

TEST(Midfield, VerticalFlatHasNoBending) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 11, 11);
  const MidField mf = midfield_general(IncidentField::vertical(), Surface::flat(0.25), c, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      EXPECT_EQ(mf.m.at(i, j), (Vec3{0.0, 0.0, 1.0}));
      EXPECT_DOUBLE_EQ(mf.d.at(i, j), 0.75);
      EXPECT_EQ(mf.Q.at(i, j), g.node(i, j));
    }
}

TEST(Midfield, GeneralAndVerticalFormulasAgree) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 21, 21, PatchShape::disk);
  const Surface s = bowl();
  const MidField a = midfield_general(IncidentField::vertical(), s, c, g);
  const MidField b = midfield_vertical(s, c, g);
  double worst = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      worst = std::max(worst, dist(a.m.at(i, j), b.m.at(i, j)));
      worst = std::max(worst, std::abs(a.d.at(i, j) - b.d.at(i, j)));
      worst = std::max(worst, norm(a.Q.at(i, j) - b.Q.at(i, j)));
      // Δ against its definition, and the unit-norm invariant.
      const Vec2 dr = s.gradient(g.node(i, j));
      EXPECT_NEAR(b.delta.at(i, j), std::sqrt(2.25 + 1.25 * norm2(dr)), 1e-12);
      EXPECT_NEAR(norm(b.m.at(i, j)), 1.0, 1e-12);
    }
  EXPECT_LE(worst, 1e-12);
}

TEST(Midfield, PointSourceOverTiltedPlaneMatchesIntersection) {
  const OpticalConstants c = lens();
  const Vec3 R{0.2, -0.1, -2.0};
  const IncidentField f = IncidentField::point_source(R);
  const Vec2 slope{0.15, -0.1};
  const Surface graph = Surface::plane(0.35, slope);
  const Surface rho = path_length_surface(graph, f, c.a);
  const UnitVec3 nu = UnitVec3::normalize({-slope.x, -slope.y, 1.0});
  for (const Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.3, 0.2}, Vec2{-0.25, 0.4}}) {
    // Ray-plane intersection by hand.
    const Vec3 e = f.direction(x);
    const double t = (0.35 + dot(slope, x)) / (e.z - dot(slope, e.xy()));
    const Vec3 P = lift(x, 0.0) + e * t;
    const Vec3 m = refract_standard(UnitVec3::normalize(e), nu, c.kappa1()).m.vec();
    const Vec3 hit = P + m * ((c.a - P.z) / m.z);
    const MidPoint mp = midfield_at(f, rho, c, x);
    EXPECT_LE(norm(mp.Q - hit.xy()), 1e-10);
    EXPECT_LE(dist(mp.m, m), 1e-10);
    EXPECT_NEAR(mp.P.z + mp.d * mp.m.z, c.a, 1e-12);
  }
}

TEST(Midfield, VerticalExamples) {
  const OpticalConstants c = lens();
  const MidPoint p0 = midfield_vertical_at({0.4, {0.0, 0.0}, Mat2::zero()}, c, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(p0.delta, 1.5);
  EXPECT_NEAR(dist(p0.m, {0.0, 0.0, 1.0}), 0.0, 1e-15);
  EXPECT_NEAR(p0.d, 0.6, 1e-15);

  const Vec2 dr{0.6, 0.8};
  const MidPoint p1 = midfield_vertical_at({0.4, dr, Mat2::zero()}, c, {0.0, 0.0});
  EXPECT_NEAR(p1.delta, std::sqrt(3.5), 1e-15);
  EXPECT_NEAR(p1.m.z, (1.0 + 1.25 / (1.0 + std::sqrt(3.5))) / 1.5, 1e-15);
  EXPECT_NEAR(p1.m.z, 0.9569, 1e-4);
  const UnitVec3 nu = UnitVec3::normalize({-dr.x, -dr.y, 1.0});
  const Vec3 m = refract_standard(UnitVec3({0.0, 0.0, 1.0}), nu, 1.5).m.vec();
  EXPECT_LE(dist(p1.m, m), 1e-15);
  EXPECT_NEAR(norm(p1.m), 1.0, 1e-12);
}

TEST(Midfield, DeviationBoundAndDepth) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.4, -0.4}, {0.4, 0.4}}, 15, 15);
  const IncidentField f = IncidentField::point_source({0.0, 0.1, -1.5});
  const MidField mf = midfield_general(f, bowl(), c, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      EXPECT_GE(dot(mf.m.at(i, j), f.direction(g.node(i, j))), 1.0 / 1.5 - 1e-12);
      EXPECT_GT(mf.d.at(i, j), 0.0);
      EXPECT_GT(mf.m.at(i, j).z, 0.0);
    }
  EXPECT_THROW(midfield_at(IncidentField::vertical(), Surface::flat(1.2), c, {0.0, 0.0}), NonPositiveDepth);
}

TEST(SufficientDet, CollimatedReducesTermwise) {
  const OpticalConstants c = lens();
  const IncidentField f = IncidentField::collimated({0.2, -0.1, 1.0});
  const SufficientTerms t = sufficient_terms(f, bowl(), c, {0.1, 0.05});
  EXPECT_EQ(t.d2h, Mat2::zero());
  EXPECT_EQ(t.cross, Mat2::zero());
  EXPECT_EQ(t.curvature, Mat2::zero());
  EXPECT_EQ(t.total(), t.bend + t.spread);
}

TEST(SufficientDet, CollimatedConcaveSurfacePassesEverywhere) {
  const OpticalConstants c = lens();
  const IncidentField f = IncidentField::collimated({0.1, 0.2, 1.0});
  const Surface s = Surface::quadratic(0.4, {0.05, -0.02}, Mat2::from(-0.8, 0.2, 0.2, -0.5));
  const Grid2D g({{-0.3, -0.3}, {0.3, 0.3}}, 7, 7);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Vec2 x = g.node(i, j);
      const MidPoint mp = midfield_at(f, s, c, x);
      ASSERT_GT(dot(mp.e, mp.nu), 0.0);
      EXPECT_TRUE(sufficient_det_general(f, s, c, x).passed());
    }
}

TEST(SufficientDet, VerticalAgreesWithGeneral) {
  const OpticalConstants c = lens();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int n = 0; n < 20; ++n) {
    const Surface s = Surface::quadratic(0.3 + 0.2 * u(rng), {0.3 * u(rng), 0.3 * u(rng)},
                                         Mat2::from(4 * u(rng), 2 * u(rng), 0.0, 4 * u(rng)));
    const Vec2 x0{0.2 * u(rng), 0.2 * u(rng)};
    const ConditionReport gen = sufficient_det_general(IncidentField::vertical(), s, c, x0);
    const ConditionReport ver = sufficient_det_vertical(s, c, x0);
    EXPECT_EQ(gen.passed(), ver.passed());
    const double predicted = vertical_big_det(s.jet(x0), c);
    EXPECT_NEAR(gen.find("big_det")->value, predicted, 1e-6 * std::abs(predicted));
  }
}

TEST(SufficientDet, VerticalExamples) {
  const OpticalConstants c = lens();
  EXPECT_TRUE(sufficient_det_vertical(Surface::quadratic(0.3, {}, Mat2::diag(0.2, 0.1)), c, {0.0, 0.0}).passed());
  const ConditionReport flat = sufficient_det_vertical(Surface::plane(0.3, {0.1, 0.2}), c, {0.0, 0.0});
  EXPECT_FALSE(flat.passed());
  EXPECT_FALSE(flat.find("det_D2rho")->passed);
  EXPECT_FALSE(sufficient_det_general(IncidentField::vertical(), Surface::plane(0.3, {0.1, 0.2}), c, {0.0, 0.0})
                   .passed());

  const Grid2D g({{-0.2, -0.2}, {0.2, 0.2}}, 21, 21);
  const LensDesign d = solve_rho(TargetMap::dilation(0.2), c, g, {0.0, 0.0});
  const Surface s = Surface::from_design(d);
  EXPECT_TRUE(sufficient_det_vertical(s, c, {0.0, 0.0}).passed());
  EXPECT_TRUE(existence_verdict(d, {0.0, 0.0}).passed());
}

TEST(EigenvalueTest, Branches) {
  const OpticalConstants c = lens();
  // Dρ = 0, a − ρ = 0.5: upper = lower = 6.
  const EigenThresholds t = eigenvalue_thresholds({0.5, {}, Mat2::zero()}, c);
  EXPECT_NEAR(t.upper, 6.0, 1e-14);
  EXPECT_NEAR(t.lower, 6.0, 1e-14);
  const Surface convex = Surface::quadratic(0.5, {}, Mat2::diag(10.0, 8.0));
  const ConditionReport r1 = eigenvalue_sufficient(convex, c, {0.0, 0.0});
  EXPECT_TRUE(r1.passed());
  EXPECT_TRUE(sufficient_det_vertical(convex, c, {0.0, 0.0}).passed());
  const Surface mixed = Surface::quadratic(0.5, {}, Mat2::from(0.3, 0.1, 0.1, -0.2));
  EXPECT_TRUE(eigenvalue_sufficient(mixed, c, {0.0, 0.0}).passed());
  // Between the branches: fails although det 𝒜 may still be nonzero.
  EXPECT_FALSE(eigenvalue_sufficient(Surface::quadratic(0.5, {}, Mat2::diag(9.0, 1.0)), c, {0.0, 0.0}).passed());
  EXPECT_THROW(eigenvalue_sufficient(Surface::plane(0.5, {0.1, 0.0}), c, {0.0, 0.0}), SingularHessian);
}

TEST(EigenvalueTest, BorderlineIsStrict) {
  OpticalConstants c = lens();
  c.n2 = 2.0;
  // κ₁ = 2, Dρ = 0, a − ρ = 1: lower = (4 + 2)/3 = 2 exactly.
  const SurfaceJet j{0.0, {}, Mat2::diag(2.0, -1.0)};
  EXPECT_EQ(eigenvalue_thresholds(j, c).lower, 2.0);
  const ConditionReport r = eigenvalue_sufficient(Surface::quadratic(0.0, {}, Mat2::diag(2.0, -1.0)), c, {0.0, 0.0});
  EXPECT_FALSE(r.passed());
}

TEST(SufficientDet, DerivativeUnavailableWithoutFd) {
  const OpticalConstants c = lens();
  const IncidentField f("user", [](const Vec2&) { return UnitVec3::normalize({0.1, 0.0, 1.0}).vec(); });
  FarfieldOptions o;
  o.allow_fd = false;
  EXPECT_THROW(sufficient_det_general(f, bowl(), c, {0.0, 0.0}, o), DerivativeUnavailable);
  EXPECT_NO_THROW(sufficient_det_general(f, bowl(), c, {0.0, 0.0}));
}

TEST(Phase, VerticalFlatIsConstant) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 11, 11);
  const Surface s = Surface::flat(0.3);
  const IncidentField f = IncidentField::vertical();
  const PhaseMap p = build_phase(f, s, midfield_general(f, s, c, g), c, {0.0, 0.0});
  const double phi0 = p.phi.at(5, 5);
  for (std::size_t n = 0; n < p.phi.values.size(); ++n) {
    EXPECT_DOUBLE_EQ(p.phi.values[n], phi0);
    EXPECT_EQ(p.grad.values[n], (Vec2{0.0, 0.0}));
  }
  // Flat lens: the sufficient determinant fails and the build says so.
  EXPECT_FALSE(p.warnings.empty());
}

TEST(Phase, CollimatedFlatGradientMatches) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 21, 21);
  const IncidentField f = IncidentField::collimated({0.3, -0.2, 1.0});
  const Surface s = Surface::flat(0.3);
  const PhaseMap p = build_phase(f, s, midfield_general(f, s, c, g), c, {0.0, 0.0});
  const VectorGrid fd = p.fd_gradient();
  for (std::size_t n = 0; n < fd.values.size(); ++n) {
    EXPECT_LE(norm(fd.values[n] - p.grad.values[n]), 1e-6);
    EXPECT_GT(norm(p.grad.values[n]), 0.1);
  }
}

TEST(Phase, PointSourceCurvedGradientConverges) {
  const OpticalConstants c = lens();
  const IncidentField f = IncidentField::point_source({0.0, 0.0, -2.0});
  const Surface s = bowl();
  double prev = 0.0;
  for (int n : {21, 41}) {
    const Grid2D g({{-0.3, -0.3}, {0.3, 0.3}}, n, n);
    const PhaseMap p = build_phase(f, s, midfield_general(f, s, c, g), c, {0.0, 0.0});
    const VectorGrid fd = p.fd_gradient();
    double worst = 0.0;
    for (std::size_t k = 0; k < fd.values.size(); ++k) worst = std::max(worst, norm(fd.values[k] - p.grad.values[k]));
    if (n == 41) EXPECT_LT(worst, prev / 3.5);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Phase, MetasurfaceSendsRaysUp) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.3, -0.3}, {0.3, 0.3}}, 13, 13, PatchShape::disk);
  for (const IncidentField& f : {IncidentField::vertical(), IncidentField::collimated({0.2, 0.1, 1.0}),
                                 IncidentField::point_source({0.0, 0.1, -2.0})}) {
    const Surface s = bowl();
    const MidField mf = midfield_general(f, s, c, g);
    const PhaseMap p = build_phase(f, s, mf, c, {0.0, 0.0});
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        if (!g.active(i, j)) continue;
        const Vec3 w = refract_metasurface(UnitVec3(mf.m.at(i, j)), UnitVec3({0.0, 0.0, 1.0}), c.kappa2(),
                                           lift(p.grad.at(i, j), 0.0), c.k)
                           .m.vec();
        EXPECT_LE(dist(w, {0.0, 0.0, 1.0}), 1e-10);
      }
  }
}

TEST(Phase, FoldIsRejected) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 11, 11);
  const Surface s = Surface::flat(0.3);
  const IncidentField f = IncidentField::vertical();
  MidField mf = midfield_general(f, s, c, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Vec2 x = g.node(i, j);
      mf.Q.at(i, j) = {x.x - 4.0 * x.x * x.x * x.x, x.y};
    }
  EXPECT_THROW(build_phase(f, s, mf, c, {0.0, 0.0}), NonInjectiveFootprint);
}

TEST(Phase, InterpolatorRecoversLinearPhase) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.5, -0.5}, {0.5, 0.5}}, 21, 21);
  const IncidentField f = IncidentField::collimated({0.3, -0.2, 1.0});
  const Surface s = Surface::flat(0.3);
  const PhaseMap p = build_phase(f, s, midfield_general(f, s, c, g), c, {0.0, 0.0});
  const PhaseInterpolator ip(p);
  const Vec2 u = p.Q.at(7, 9) * 0.5 + p.Q.at(8, 10) * 0.5;
  const auto grad = ip.gradient(u);
  ASSERT_TRUE(grad.has_value());
  EXPECT_LE(norm(*grad - p.grad.at(7, 9)), 1e-9);
  EXPECT_FALSE(ip.gradient({10.0, 10.0}).has_value());
}

TEST(NecessaryIdentity, HoldsForCurlFreeFields) {
  const OpticalConstants c = lens();
  const Grid2D g({{-0.2, -0.2}, {0.2, 0.2}}, 21, 21);
  for (const IncidentField& f : {IncidentField::vertical(), IncidentField::collimated({0.2, 0.1, 1.0}),
                                 IncidentField::point_source({0.0, 0.1, -2.0})}) {
    const NecessaryResidual r = necessary_identity(f, bowl(), c, g, {0.0, 0.0});
    EXPECT_GT(r.nodes, 200u);
    EXPECT_LE(r.max_residual, 1e-5) << f.name();
  }
}
