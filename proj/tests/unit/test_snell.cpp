#include <gtest/gtest.h>

#include <random>

#include "hybridlens/errors.hpp"
#include "hybridlens/snell.hpp"

using namespace hybridlens;

namespace {
const UnitVec3 kUp{Vec3{0, 0, 1}};
}

TEST(Snell, NormalIncidence) {
  const auto r = refract_standard(kUp, kUp, 1.5);
  EXPECT_DOUBLE_EQ(r.multiplier, -0.5);
  EXPECT_EQ(r.m.vec(), (Vec3{0, 0, 1}));
}

TEST(Snell, PlanarSineLaw) {
  const UnitVec3 x{Vec3{0.5, 0, std::sqrt(3.0) / 2}};
  const auto r = refract_standard(x, kUp, 1.5);
  // n1 sin θ1 = n2 sin θ2
  const double sin2 = 0.5 / 1.5;
  const double cos2 = std::sqrt(1 - sin2 * sin2);
  EXPECT_NEAR(r.m.x(), sin2, 1e-15);
  EXPECT_NEAR(r.m.y(), 0.0, 1e-15);
  EXPECT_NEAR(r.m.z(), cos2, 1e-15);
  EXPECT_NEAR(r.multiplier, std::sqrt(3.0) / 2 - 1.5 * cos2, 1e-15);
  EXPECT_NEAR(r.multiplier, -0.5482, 1e-4);
}

TEST(Snell, TotalInternalReflection) {
  const UnitVec3 x{Vec3{0.9, 0, std::sqrt(1 - 0.81)}};
  EXPECT_LT(x.z(), std::sqrt(1 - 0.64));
  EXPECT_THROW(refract_standard(x, kUp, 0.8), TotalInternalReflection);
}

TEST(Snell, RejectsBackwardNormal) {
  const UnitVec3 down{Vec3{0, 0, -1}};
  EXPECT_THROW(refract_standard(kUp, down, 1.5), InvalidIncidence);
}

TEST(Snell, MetasurfaceWithoutPhaseMatchesStandard) {
  const UnitVec3 x = UnitVec3::normalize({0.2, -0.4, 0.9});
  const UnitVec3 nu = UnitVec3::normalize({0.1, 0.05, 1});
  for (double kappa : {0.8, 1.33, 1.5, 2.0}) {
    const auto a = refract_standard(x, nu, kappa);
    const auto b = refract_metasurface(x, nu, kappa, Vec3{}, 3.0);
    EXPECT_LE(norm(a.m.vec() - b.m.vec()), 1e-15);
    EXPECT_NEAR(a.multiplier, b.multiplier, 1e-15);
  }
}

TEST(Snell, MetasurfaceCancelsTangentialComponent) {
  const double k = 2.5;
  const UnitVec3 m = UnitVec3::normalize({0.3, -0.2, 0.8});
  for (double kappa : {0.6, 1.0 / 1.5, 1.5, 3.0}) {
    const auto r = refract_metasurface(m, kUp, kappa, Vec3{k * m.x(), k * m.y(), 0}, k);
    EXPECT_NEAR(r.m.x(), 0.0, 1e-15);
    EXPECT_NEAR(r.m.y(), 0.0, 1e-15);
    EXPECT_NEAR(r.m.z(), 1.0, 1e-15);
    EXPECT_NEAR(r.multiplier, m.z() - kappa, 1e-15);
  }
}

TEST(Snell, MetasurfaceTIR) {
  // 1 < 1.81 − 0.25 fails the bracket
  const double k = 1.7;
  EXPECT_THROW(refract_metasurface(kUp, kUp, 0.5, Vec3{k * 0.9, 0, 0}, k), MetaTotalInternalReflection);
}

TEST(Snell, DeviationBound) {
  EXPECT_DOUBLE_EQ(deviation_lower_bound(1.5), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(deviation_lower_bound(0.8), 0.8);
  EXPECT_DOUBLE_EQ(deviation_lower_bound(2.0), 0.5);
  EXPECT_THROW(deviation_lower_bound(1.0), InvalidArgument);
}

TEST(Snell, GeneralizedTangentialLaw) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  while (checked < 2000) {
    const UnitVec3 nu = UnitVec3::normalize({0.3 * u(rng), 0.3 * u(rng), 1});
    const UnitVec3 x = UnitVec3::normalize({u(rng), u(rng), 1.5 + u(rng)});
    const double k = 2.0;
    const Vec3 g{0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng)};
    const double n1 = 1.0, n2 = 1.5;
    try {
      const auto r = refract_metasurface(x, nu, n2 / n1, g, k);
      const Vec3 lhs = cross3(x.vec() - g / k, nu.vec()) * n1;
      const Vec3 rhs = cross3(r.m.vec(), nu.vec()) * n2;
      EXPECT_LE(norm(lhs - rhs), 1e-12);
      ++checked;
    } catch (const InvalidIncidence&) {
    }
  }
}

TEST(Snell, OptionsValidation) {
  OpticalConstants c;
  EXPECT_NO_THROW(c.validate_lens());
  c.c = 0.5;
  EXPECT_THROW(c.validate_lens(), InvalidArgument);
  c = {};
  c.n2 = 0.9;
  EXPECT_THROW(c.validate_lens(), InvalidArgument);
  c.n1 = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
}
