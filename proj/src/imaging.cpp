#include "hybridlens/imaging.hpp"

#include <cstdio>
#include <sstream>

#include "hybridlens/errors.hpp"

namespace hybridlens {

VarphiProfile::VarphiProfile(double kappa1) : kappa_(kappa1) {
  if (!(kappa1 > 1.0)) throw InvalidArgument("VarphiProfile: kappa1 must exceed 1");
}

void VarphiProfile::require_domain(double y) const {
  if (!(y >= 0.0) || !(y < y_max())) {
    throw DomainViolation("VarphiProfile: y = " + std::to_string(y) + " outside [0, kappa1^2 - 1)");
  }
}

double VarphiProfile::operator()(double y) const {
  require_domain(y);
  return kappa_ / (kappa_ - std::sqrt(y + 1.0));
}

double VarphiProfile::derivative(double y) const {
  const double p = (*this)(y);
  return p * p / (2.0 * kappa_ * std::sqrt(y + 1.0));
}

ConditionReport thickness_check(const TargetMap& map, const OpticalConstants& constants, const Grid2D& grid) {
  const double root = std::sqrt(constants.kappa1() * constants.kappa1() - 1.0);
  double worst = std::numeric_limits<double>::infinity();
  Vec2 where;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      const double m = constants.a - norm(map.S(grid.node(i, j))) / root;
      if (m < worst) {
        worst = m;
        where = grid.node(i, j);
      }
    }
  ConditionReport r;
  r.title = "thickness a > |S|/sqrt(kappa1^2 - 1)";
  std::ostringstream at;
  at << "worst node (" << where.x << ", " << where.y << ")";
  r.add({"thickness", "a > |S|/sqrt(κ₁²−1)", worst, 0.0, worst, worst > 0.0, at.str()});
  return r;
}

namespace {

struct Pointwise {
  double y;    // |S/z|²
  double phi;  // φ̃(y)
  double dphi; // φ̃′(y)
};

Pointwise profile_at(const Vec2& s, double z, double kappa1) {
  const VarphiProfile p(kappa1);
  const double y = norm2(s) / (z * z);
  return {y, p(y), p.derivative(y)};
}

}  // namespace

Vec2 rhs_V(const Vec2& s, double z, double kappa1) {
  if (!(kappa1 > 1.0)) throw InvalidArgument("rhs_V: kappa1 must exceed 1");
  const double y = norm2(s) / (z * z);
  if (!(z > 0.0) || !(y < kappa1 * kappa1 - 1.0)) {
    throw FeasibilityViolation("rhs_V: z must exceed |S|/sqrt(kappa1^2 - 1)", kNaN, kNaN);
  }
  return s / z * (kappa1 / (kappa1 - std::sqrt(y + 1.0)));
}

Vec2 rhs_V(const Vec2& x, double z, const TargetMap& map, double kappa1) {
  try {
    return rhs_V(map.S(x), z, kappa1);
  } catch (const FeasibilityViolation& e) {
    throw FeasibilityViolation(e.what(), x.x, x.y);
  }
}

double default_z0(const TargetMap& map, const OpticalConstants& constants, const Vec2& x0) {
  const double k = constants.kappa1();
  const double lower = norm(map.S(x0)) / std::sqrt(k * k - 1.0);
  return 0.5 * (lower + constants.a);
}

Mat2 hessian_from_pde(const Vec2& s, const Mat2& ds, double z, double kappa1) {
  const Pointwise p = profile_at(s, z, kappa1);
  const Vec2 sds = row_times(s, ds);  // (S·S_{x_j})_j
  const double s2 = norm2(s);
  const double z2 = z * z;
  Mat2 h;
  for (int i = 0; i < 2; ++i) {
    const double dvi_dz = -2.0 * s2 / (z2 * z2) * p.dphi * s[i] - p.phi / z2 * s[i];
    for (int j = 0; j < 2; ++j) {
      const double dvi_dxj = 2.0 * s[i] / (z2 * z) * sds[j] * p.dphi + p.phi / z * ds(i, j);
      const double vj = p.phi * s[j] / z;
      h(i, j) = -dvi_dxj - vj * dvi_dz;
    }
  }
  return h;
}

Mat2 hessian_closed_form(const Vec2& s, const Mat2& ds, double z, double kappa1) {
  const Pointwise p = profile_at(s, z, kappa1);
  const double z2 = z * z;
  const Mat2 ss = outer(s, s);
  const Mat2 left = Mat2::identity() + ss * (2.0 / z2 * p.dphi / p.phi);
  const Mat2 right = ss * (p.phi / z2) - ds;
  return left * right * (p.phi / z);
}

Mat2 matA_closed_form(const Vec2& s, const Mat2& ds, double z, double kappa1) {
  const Pointwise p = profile_at(s, z, kappa1);
  const Mat2 left = Mat2::identity() + outer(s, s) * (2.0 / (z * z) * p.dphi / p.phi);
  return left * (Mat2::identity() + ds);
}

double delta_from_gradient(const Vec2& drho, double kappa1) {
  const double k2 = kappa1 * kappa1;
  return std::sqrt(k2 + (k2 - 1.0) * norm2(drho));
}

double delta_closed_form(const Vec2& s, double z, double kappa1) {
  const double r = std::sqrt(norm2(s) + z * z);
  return (kappa1 * kappa1 * r - kappa1 * z) / (kappa1 * z - r);
}

Mat2 matA_direct(const Vec2& drho, const Mat2& d2rho, double rho, double a, double kappa1) {
  const double k2 = kappa1 * kappa1;
  const double delta = delta_from_gradient(drho, kappa1);
  return Mat2::identity() + outer(drho, drho) * ((k2 - 1.0) / k2) + d2rho * ((1.0 - k2) * (a - rho) / (k2 + delta));
}

namespace {

double z_at(const LensDesign& d, const Vec2& x0) {
  if (x0 == d.x0) return d.z0;
  const auto [i, j] = d.grid.nearest_node(x0);
  if (d.grid.node(i, j) == x0 && !std::isnan(d.z.at(i, j))) return d.z.at(i, j);
  throw InvalidArgument("x0 must be the design basepoint or a solved grid node");
}

}  // namespace

Mat2 hessian_closed_form(const LensDesign& design, const Vec2& x0) {
  return hessian_closed_form(design.map.S(x0), design.map.DS(x0), z_at(design, x0), design.constants.kappa1());
}

Mat2 matA_closed_form(const LensDesign& design, const Vec2& x0) {
  return matA_closed_form(design.map.S(x0), design.map.DS(x0), z_at(design, x0), design.constants.kappa1());
}

Mat2 matA_direct(const LensDesign& design, const Vec2& x0) {
  const double z = z_at(design, x0);
  const double k = design.constants.kappa1();
  const Vec2 s = design.map.S(x0);
  const Vec2 drho = -rhs_V(s, z, k);
  const Mat2 d2 = hessian_from_pde(s, design.map.DS(x0), z, k);
  return matA_direct(drho, d2, design.constants.a - z, design.constants.a, k);
}

LemmaResidual lemma_identity_check(const Vec2& y, double kappa1) {
  const VarphiProfile p(kappa1);
  const double t = norm2(y);
  const double phi = p(t);
  const double dphi = p.derivative(t);
  const Mat2 yy = outer(y, y);
  const Mat2 I = Mat2::identity();
  const double k2 = kappa1 * kappa1;
  const Mat2 lhs = I + yy * ((k2 - 1.0) / k2 * phi * phi);
  const Mat2 rhs = (I + yy * phi) * (I + yy * (2.0 * dphi / phi));
  LemmaResidual r;
  r.absolute = (lhs - rhs).frobenius();
  r.relative = r.absolute / std::max(1.0, lhs.frobenius());
  return r;
}

namespace {

ConditionEntry nonzero(std::string id, std::string name, double value, double scale, std::string detail) {
  const double thr = kNonzeroRelTol * scale;
  const double v = std::abs(value);
  return {std::move(id), std::move(name), v, thr, v - thr, v > thr, std::move(detail)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConditionReport existence_verdict(const TargetMap& map, const OpticalConstants& constants, const Vec2& x0, double z0,
                                  double tol_fixed) {
  const double k = constants.kappa1();
  const double lower = norm(map.S(x0)) / std::sqrt(k * k - 1.0);
  ConditionReport r;
  r.title = "existence of the phase discontinuity near x0 for map '" + map.name() + "'";
  const double feas = std::min(constants.a - z0, z0 - lower);
  r.add({"feasible_z0", "a > z₀ > |S(x₀)|/sqrt(κ₁²−1)", z0, lower, feas, feas > 0.0,
         "z0 = " + fmt(z0) + ", bounds (" + fmt(lower) + ", " + fmt(constants.a) + ")"});
  if (!(feas > 0.0)) return r;

  const Mat2 ds = map.DS(x0);
  const Mat2 dt = Mat2::identity() + ds;
  r.add(nonzero("det_DT", "det(I+DS) ≠ 0", dt.det(), dt.frobenius() * dt.frobenius(), "A invertible iff DT invertible"));

  const EigenStructure es = eigen_structure(map, x0, tol_fixed);
  if (const auto* fp = std::get_if<FixedPoint>(&es)) {
    const double n = fp->ds.frobenius();
    r.add(nonzero("det_DS", "det DS ≠ 0", fp->ds.det(), n * n, "case (1): S(x0) = 0"));
    if (n <= tol_fixed) {
      r.notes.push_back(
          "flat-lens special case: S = 0 and DS = 0 at x0, so T is the identity there; a horizontal plane with "
          "constant phase realizes it even though D2rho is singular");
    }
  } else {
    const auto& ep = std::get<EigenPair>(es);
    const double y = norm2(ep.s) / (z0 * z0);
    const double bound = y * VarphiProfile(k)(y);
    const double scale = std::max(ep.ds.frobenius(), bound);
    r.add(nonzero("zeta_gap", "ζ ≠ (|S|²/z₀²)φ̃", ep.zeta - bound, scale,
                  "case (2): zeta = " + fmt(ep.zeta) + ", (|S|^2/z0^2) varphi = " + fmt(bound)));
    r.add(nonzero("zeta_perp", "ζ⊥ ≠ 0", ep.zeta_perp, scale, "case (2): zeta_perp = " + fmt(ep.zeta_perp)));
    r.notes.push_back("zeta = " + fmt(ep.zeta) + ", zeta_perp = " + fmt(ep.zeta_perp));
  }
  return r;
}

ConditionReport existence_verdict(const LensDesign& design, const Vec2& x0) {
  return existence_verdict(design.map, design.constants, x0, z_at(design, x0), default_tol_fixed(design.grid));
}

LensDesign solve_rho(const TargetMap& map, const OpticalConstants& constants, const Grid2D& grid, const Vec2& x0,
                     std::optional<double> z0_opt, const SolveOptions& options) {
  constants.validate_lens();
  if (options.substeps < 1) throw InvalidArgument("solve_rho: substeps must be >= 1");
  if (!grid.contains(x0)) throw InvalidArgument("solve_rho: x0 lies outside the grid patch");
  const double k = constants.kappa1();
  const double a = constants.a;
  const double root = std::sqrt(k * k - 1.0);
  const double slack = options.feasibility_slack;
  const double z0 = z0_opt.value_or(default_z0(map, constants, x0));

  auto check_node = [&](const Vec2& x, double z) {
    const double lower = norm(map.S(x)) / root;
    if (!(z > lower * (1.0 + slack)) || !(z < a * (1.0 - slack))) {
      std::ostringstream msg;
      msg << "solve_rho: imaging inequality a > z > |S|/sqrt(kappa1^2-1) fails at (" << x.x << ", " << x.y
          << "): z = " << z << ", bounds (" << lower << ", " << a << ")";
      throw FeasibilityViolation(msg.str(), x.x, x.y);
    }
  };
  check_node(x0, z0);

  const Vec2 h = grid.spacing();
  const double rk_step = std::max(h.x, h.y) / options.substeps;
  auto V = [&](const Vec2& x, double z) { return rhs_V(x, z, map, k); };
  auto step = [&](double z, const Vec2& from, const Vec2& to) {
    const Vec2 delta = (to - from) / static_cast<double>(options.substeps);
    Vec2 x = from;
    for (int n = 0; n < options.substeps; ++n) {
      const double k1 = dot(V(x, z), delta);
      const double k2 = dot(V(x + delta * 0.5, z + 0.5 * k1), delta);
      const double k3 = dot(V(x + delta * 0.5, z + 0.5 * k2), delta);
      const double k4 = dot(V(x + delta, z + k3), delta);
      z += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
      x = n + 1 == options.substeps ? to : from + delta * static_cast<double>(n + 1);
    }
    check_node(to, z);
    return z;
  };

  LensDesign d;
  d.grid = grid;
  d.constants = constants;
  d.map = map;
  d.x0 = x0;
  d.z0 = z0;
  d.rk_step = rk_step;
  d.z = staircase_sweep(grid, x0, z0, Axis::x1, step);
  d.path_tol = options.path_tol.value_or(100.0 * std::pow(rk_step, 4));
  if (options.check_paths) {
    const ScalarGrid other = staircase_sweep(grid, x0, z0, Axis::x2, step);
    for (std::size_t n = 0; n < d.z.values.size(); ++n) {
      const double u = d.z.values[n];
      const double v = other.values[n];
      if (!std::isnan(u) && !std::isnan(v)) d.path_residual = std::max(d.path_residual, std::abs(u - v));
    }
    if (d.path_residual > d.path_tol) {
      std::ostringstream msg;
      msg << "solve_rho: x1-first and x2-first integration disagree by " << d.path_residual << " > " << d.path_tol
          << "; the map is not integrable (check curl S and S x D|S|^2)";
      throw PathInconsistency(msg.str());
    }
  }

  d.rho = ScalarGrid(grid, kNaN);
  d.drho = nan_vector_grid(grid);
  d.d2rho = GridField<Mat2>(grid, Mat2::from(kNaN, kNaN, kNaN, kNaN));
  parallel_for(static_cast<std::size_t>(grid.ny()), [&](std::size_t ju) {
    const int j = static_cast<int>(ju);
    for (int i = 0; i < grid.nx(); ++i) {
      const double z = d.z.at(i, j);
      if (std::isnan(z)) continue;
      const Vec2 x = grid.node(i, j);
      const Vec2 s = map.S(x);
      d.rho.at(i, j) = a - z;
      d.drho.at(i, j) = -rhs_V(s, z, k);
      d.d2rho.at(i, j) = hessian_from_pde(s, map.DS(x), z, k);
    }
  });
  return d;
}

}  // namespace hybridlens
