#include "hybridlens/farfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "hybridlens/errors.hpp"
#include "hybridlens/imaging.hpp"
#include "hybridlens/parallel.hpp"

namespace hybridlens {

namespace {

bool nonzero(double det, double scale) { return std::abs(det) > kNonzeroRelTol * scale * scale; }

ConditionEntry det_entry(std::string id, std::string name, double det, double scale) {
  ConditionEntry e;
  e.id = std::move(id);
  e.name = std::move(name);
  e.value = det;
  e.threshold = kNonzeroRelTol * scale * scale;
  e.margin = std::abs(det) - e.threshold;
  e.passed = nonzero(det, scale);
  return e;
}

Vec3 nan3() { return {kNaN, kNaN, kNaN}; }

// Grid derivative of a sampled quantity along one axis: fourth-order central
// when two neighbours on each side exist, then second-order central, then
// one-sided. NaN when nothing fits. Written in differences so constants give 0.
template <class T, class Get>
T grid_diff(const Grid2D& g, int i, int j, Axis axis, Get get, bool interior_only, const T& nan_value) {
  const bool along_x = axis == Axis::x1;
  const double h = along_x ? g.spacing().x : g.spacing().y;
  const int n = along_x ? g.nx() : g.ny();
  const int k = along_x ? i : j;
  auto ok = [&](int o) {
    const int kk = k + o;
    if (kk < 0 || kk >= n) return false;
    const int ii = along_x ? kk : i;
    const int jj = along_x ? j : kk;
    return g.active(ii, jj);
  };
  auto f = [&](int o) { return along_x ? get(i + o, j) : get(i, j + o); };
  if (ok(-2) && ok(-1) && ok(1) && ok(2)) return ((f(1) - f(-1)) * 8.0 - (f(2) - f(-2))) / (12.0 * h);
  if (interior_only) return nan_value;
  if (ok(-1) && ok(1)) return (f(1) - f(-1)) / (2.0 * h);
  if (ok(1) && ok(2)) return ((f(1) - f(0)) * 4.0 - (f(2) - f(0))) / (2.0 * h);
  if (ok(-1) && ok(-2)) return ((f(0) - f(-1)) * 4.0 - (f(0) - f(-2))) / (2.0 * h);
  return nan_value;
}

Mat32 field_jacobian(const IncidentField& field, const Vec2& x, const FarfieldOptions& options) {
  if (field.is_vertical()) return Mat32{};
  if (!field.has_analytic_jacobian() && !options.allow_fd)
    throw DerivativeUnavailable("field '" + field.name() + "' has no analytic Jacobian and FD is disabled");
  return field.jacobian(x);
}

}  // namespace

MidPoint midfield_at(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                     const Vec2& x) {
  const double kappa = constants.kappa1();
  MidPoint out;
  out.e = field.direction(x);
  const SurfaceJet j = rho.jet(x);
  const Mat32 de = field.is_vertical() ? Mat32{} : field.jacobian(x);
  out.P = lift(x, 0.0) + out.e * j.value;
  const Vec3 p1 = Vec3{1.0, 0.0, 0.0} + out.e * j.grad.x + de.column(0) * j.value;
  const Vec3 p2 = Vec3{0.0, 1.0, 0.0} + out.e * j.grad.y + de.column(1) * j.value;
  Vec3 n = cross3(p1, p2);
  if (n.z < 0.0) n = -n;
  const UnitVec3 nu = UnitVec3::normalize(n);
  out.nu = nu.vec();
  const RefractionResult r = refract_standard(UnitVec3::normalize(out.e), nu, kappa);
  out.m = r.m.vec();
  out.lambda = r.multiplier;
  const double depth = constants.a - j.value * out.e.z;
  if (!(depth > 0.0)) {
    std::ostringstream msg;
    msg << "a - rho e3 = " << depth << " at (" << x.x << ", " << x.y << ")";
    throw NonPositiveDepth(msg.str());
  }
  out.d = depth / out.m.z;
  out.Q = out.P.xy() + out.m.xy() * out.d;
  return out;
}

MidPoint midfield_vertical_at(const SurfaceJet& jet, const OpticalConstants& constants, const Vec2& x) {
  const double kappa = constants.kappa1();
  const double k2 = kappa * kappa;
  const double z = constants.a - jet.value;
  if (!(z > 0.0)) {
    std::ostringstream msg;
    msg << "a - rho = " << z << " at (" << x.x << ", " << x.y << ")";
    throw NonPositiveDepth(msg.str());
  }
  MidPoint out;
  out.delta = std::sqrt(k2 + (k2 - 1.0) * norm2(jet.grad));
  const double q = 1.0 + out.delta;
  out.e = {0.0, 0.0, 1.0};
  out.P = lift(x, jet.value);
  const double len = std::sqrt(1.0 + norm2(jet.grad));
  out.nu = lift(-jet.grad, 1.0) / len;
  out.lambda = (1.0 - k2) * len / q;
  out.m = lift(jet.grad * ((1.0 - k2) / q), 1.0 + (k2 - 1.0) / q) / kappa;
  out.d = kappa * z * q / (k2 + out.delta);
  out.Q = x + out.m.xy() * out.d;
  return out;
}

namespace {

template <class PointFn>
MidField fill_midfield(const Grid2D& grid, PointFn point) {
  MidField out;
  out.grid = grid;
  out.m = GridField<Vec3>(grid, nan3());
  out.d = nan_scalar_grid(grid);
  out.Q = nan_vector_grid(grid);
  out.delta = nan_scalar_grid(grid);
  parallel_for(static_cast<std::size_t>(grid.ny()), [&](std::size_t ju) {
    const int j = static_cast<int>(ju);
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      const MidPoint p = point(grid.node(i, j));
      out.m.at(i, j) = p.m;
      out.d.at(i, j) = p.d;
      out.Q.at(i, j) = p.Q;
      out.delta.at(i, j) = p.delta;
    }
  });
  return out;
}

}  // namespace

MidField midfield_general(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                          const Grid2D& grid) {
  constants.validate_lens();
  return fill_midfield(grid, [&](const Vec2& x) { return midfield_at(field, rho, constants, x); });
}

MidField midfield_vertical(const Surface& rho, const OpticalConstants& constants, const Grid2D& grid) {
  constants.validate_lens();
  return fill_midfield(grid, [&](const Vec2& x) { return midfield_vertical_at(rho.jet(x), constants, x); });
}

SufficientTerms sufficient_terms(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                                 const Vec2& x0, const FarfieldOptions& options) {
  constants.validate_lens();
  if (!rho.analytic() && !options.allow_fd)
    throw DerivativeUnavailable("surface '" + rho.name() + "' has no analytic Hessian and FD is disabled");
  const double kappa = constants.kappa1();
  const SurfaceJet j = rho.jet(x0);
  const MidPoint mp = midfield_at(field, rho, constants, x0);
  const Mat32 de = field_jacobian(field, x0, options);

  // Dm and D(mDe) always come from central differences of the pointwise maps.
  const FDStencil st = FDStencil::uniform(options.fd_step, 4);
  const Vector3Fn2 mfn = [&](const Vec2& x) { return midfield_at(field, rho, constants, x).m; };
  const Mat32 dm = fd_jacobian(mfn, x0, st);
  const VectorFn2 wfn = [&](const Vec2& x) {
    return row_times(midfield_at(field, rho, constants, x).m, field_jacobian(field, x, options));
  };
  const Vec2 w = row_times(mp.m, de);
  const Mat2 dw = field.is_vertical() ? Mat2::zero() : fd_jacobian(wfn, x0, st);

  SufficientTerms t;
  t.d2h = de.top();
  t.bend = j.hess * (1.0 - kappa * dot(mp.e, mp.m));
  t.cross = (outer(j.grad, w) + outer(w, j.grad)) * -kappa;
  t.curvature = (dw - outer(de, dm)) * (-kappa * j.value);
  t.spread = outer(dm, dm) * (kappa * mp.d);
  return t;
}

ConditionReport sufficient_det_general(const IncidentField& field, const Surface& rho,
                                       const OpticalConstants& constants, const Vec2& x0,
                                       const FarfieldOptions& options) {
  const Mat2 B = sufficient_terms(field, rho, constants, x0, options).total();
  ConditionReport r;
  r.title = "sufficient determinant (" + field.name() + ")";
  const double scale = std::max(B.frobenius(), 1.0 / constants.a);
  r.add(det_entry("big_det", "det B ≠ 0", B.det(), scale));
  return r;
}

ConditionReport sufficient_det_vertical(const Surface& rho, const OpticalConstants& constants, const Vec2& x0) {
  constants.validate_lens();
  const SurfaceJet j = rho.jet(x0);
  const double kappa = constants.kappa1();
  const Mat2 A = matA_direct(j.grad, j.hess, j.value, constants.a, kappa);
  ConditionReport r;
  r.title = "sufficient determinant (vertical)";
  r.add(det_entry("det_D2rho", "det D²ρ ≠ 0", j.hess.det(), std::max(j.hess.frobenius(), 1.0 / constants.a)));
  r.add(det_entry("det_A", "det 𝒜 ≠ 0", A.det(), std::max(A.frobenius(), 1.0)));
  std::ostringstream note;
  note.precision(17);
  note << "implied det B = " << vertical_big_det(j, constants);
  r.notes.push_back(note.str());
  return r;
}

double vertical_big_det(const SurfaceJet& jet, const OpticalConstants& constants) {
  const double kappa = constants.kappa1();
  const double k2 = kappa * kappa;
  const double delta = delta_from_gradient(jet.grad, kappa);
  const double fac = (1.0 - k2) / (1.0 + delta);
  const Mat2 A = matA_direct(jet.grad, jet.hess, jet.value, constants.a, kappa);
  return jet.hess.det() * fac * fac * (k2 / (delta * delta)) * A.det();
}

EigenThresholds eigenvalue_thresholds(const SurfaceJet& jet, const OpticalConstants& constants) {
  const double kappa = constants.kappa1();
  const double k2 = kappa * kappa;
  const double delta = delta_from_gradient(jet.grad, kappa);
  const double z = constants.a - jet.value;
  EigenThresholds t;
  t.upper = delta * delta * (k2 + delta) / (k2 * (k2 - 1.0) * z);
  t.lower = (k2 + delta) / ((k2 - 1.0) * z);
  return t;
}

ConditionReport eigenvalue_sufficient(const Surface& rho, const OpticalConstants& constants, const Vec2& x0) {
  constants.validate_lens();
  const SurfaceJet j = rho.jet(x0);
  if (!nonzero(j.hess.det(), std::max(j.hess.frobenius(), 1.0 / constants.a))) {
    std::ostringstream msg;
    msg << "eigenvalue_sufficient: D²rho is singular at (" << x0.x << ", " << x0.y << "), det = " << j.hess.det();
    throw SingularHessian(msg.str());
  }
  const SymEigen2 eig = sym_eigen(j.hess);
  const EigenThresholds t = eigenvalue_thresholds(j, constants);
  const double upper_margin = eig.lambda2 - t.upper;
  const double lower_margin = t.lower - eig.lambda1;
  ConditionReport r;
  r.title = "eigenvalue test";
  ConditionEntry e;
  e.id = "eigen";
  e.name = "Λ₂ > Δ²(κ₁²+Δ)/(κ₁²(κ₁²−1)(a−ρ)) or Λ₁ < (κ₁²+Δ)/((κ₁²−1)(a−ρ))";
  e.value = std::max(upper_margin, lower_margin);
  e.threshold = 0.0;
  e.margin = e.value;
  e.passed = upper_margin > 0.0 || lower_margin > 0.0;
  std::ostringstream detail;
  detail.precision(17);
  detail << "Lambda1 = " << eig.lambda1 << ", Lambda2 = " << eig.lambda2 << ", upper branch margin = " << upper_margin
         << ", lower branch margin = " << lower_margin;
  e.detail = detail.str();
  r.add(e);
  r.notes.push_back("sufficient only: a failure does not mean det A vanishes");
  return r;
}

VectorGrid PhaseMap::fd_gradient() const {
  VectorGrid out = nan_vector_grid(grid);
  const Vec2 nanv{kNaN, kNaN};
  parallel_for(static_cast<std::size_t>(grid.ny()), [&](std::size_t ju) {
    const int j = static_cast<int>(ju);
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      auto getq = [&](int a, int b) { return Q.at(a, b); };
      auto getp = [&](int a, int b) { return phi.at(a, b); };
      const Vec2 q1 = grid_diff<Vec2>(grid, i, j, Axis::x1, getq, false, nanv);
      const Vec2 q2 = grid_diff<Vec2>(grid, i, j, Axis::x2, getq, false, nanv);
      const double p1 = grid_diff<double>(grid, i, j, Axis::x1, getp, false, kNaN);
      const double p2 = grid_diff<double>(grid, i, j, Axis::x2, getp, false, kNaN);
      const Mat2 dq = Mat2::from(q1.x, q2.x, q1.y, q2.y);
      if (!std::isfinite(dq.det()) || dq.det() == 0.0 || !std::isfinite(p1) || !std::isfinite(p2)) continue;
      out.at(i, j) = dq.transpose().inverse() * Vec2{p1, p2};
    }
  });
  return out;
}

PhaseMap build_phase(const IncidentField& field, const Surface& rho, const MidField& midfield,
                     const OpticalConstants& constants, const Vec2& x0) {
  constants.validate_lens();
  const Grid2D& g = midfield.grid;
  const double kappa = constants.kappa1();
  PhaseMap out;
  out.grid = g;
  out.Q = midfield.Q;
  out.k = constants.k;
  out.a = constants.a;
  out.kappa2 = constants.kappa2();

  try {
    const ConditionReport det = field.is_vertical() ? sufficient_det_vertical(rho, constants, x0)
                                                    : sufficient_det_general(field, rho, constants, x0);
    if (!det.passed()) {
      std::string names;
      for (const auto& n : det.failing()) names += (names.empty() ? "" : ", ") + n;
      out.warnings.push_back("sufficient determinant fails at x0 (" + names + "); phase built anyway");
    }
  } catch (const std::exception& err) {
    out.warnings.push_back(std::string("sufficient determinant not evaluated at x0: ") + err.what());
  }

  ScalarGrid h;
  if (field.has_potential()) {
    h = sample(g, kNaN, [&](const Vec2& x) { return field.potential(x); });
  } else {
    h = recover_potential(field, g, x0).h;
  }

  out.phi = nan_scalar_grid(g);
  out.grad = nan_vector_grid(g);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      const double f = h.at(i, j) / kappa + rho.value(g.node(i, j)) / kappa + midfield.d.at(i, j);
      out.phi.at(i, j) = constants.k * f;
      out.grad.at(i, j) = midfield.m.at(i, j).xy() * constants.k;
    }
  }

  // Fold detection: every footprint triangle keeps the orientation of the
  // whole footprint.
  double total = 0.0;
  std::vector<std::tuple<int, int, double, double>> areas;
  for (int j = 0; j + 1 < g.ny(); ++j) {
    for (int i = 0; i + 1 < g.nx(); ++i) {
      if (!(g.active(i, j) && g.active(i + 1, j) && g.active(i, j + 1) && g.active(i + 1, j + 1))) continue;
      const Vec2 q00 = out.Q.at(i, j), q10 = out.Q.at(i + 1, j), q01 = out.Q.at(i, j + 1),
                 q11 = out.Q.at(i + 1, j + 1);
      const double a1 = 0.5 * cross2(q10 - q00, q11 - q00);
      const double a2 = 0.5 * cross2(q11 - q00, q01 - q00);
      areas.emplace_back(i, j, a1, a2);
      total += a1 + a2;
    }
  }
  const double sign = total >= 0.0 ? 1.0 : -1.0;
  const double tol = 1e-12 * g.spacing().x * g.spacing().y;
  for (const auto& [i, j, a1, a2] : areas) {
    if (sign * a1 < -tol || sign * a2 < -tol) {
      std::ostringstream msg;
      msg << "footprint folds in cell (" << i << ", " << j << ") near x = (" << g.x(i) << ", " << g.y(j) << ")";
      throw NonInjectiveFootprint(msg.str());
    }
  }
  return out;
}

PhaseInterpolator::PhaseInterpolator(const PhaseMap& phase, double gradient_scale) : phase_(&phase) {
  grad_ = phase.fd_gradient();
  for (auto& v : grad_.values) v = v * gradient_scale;
  const Grid2D& g = phase.grid;
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      const Vec2 q = phase.Q.at(i, j);
      lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
      hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
    }
  bbox_ = Box2{lo, hi};
  bx_ = std::max(1, g.nx() - 1);
  by_ = std::max(1, g.ny() - 1);
  buckets_.assign(static_cast<std::size_t>(bx_) * by_, {});
  const double wx = (hi.x - lo.x) / bx_;
  const double wy = (hi.y - lo.y) / by_;
  auto bucket_of = [&](double v, double l, double w, int n) {
    if (!(w > 0.0)) return 0;
    return std::clamp(static_cast<int>(std::floor((v - l) / w)), 0, n - 1);
  };
  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i) {
      if (!(g.active(i, j) && g.active(i + 1, j) && g.active(i, j + 1) && g.active(i + 1, j + 1))) continue;
      const Vec2 qs[4] = {phase.Q.at(i, j), phase.Q.at(i + 1, j), phase.Q.at(i, j + 1), phase.Q.at(i + 1, j + 1)};
      Vec2 cl = qs[0], ch = qs[0];
      for (const auto& q : qs) {
        cl = {std::min(cl.x, q.x), std::min(cl.y, q.y)};
        ch = {std::max(ch.x, q.x), std::max(ch.y, q.y)};
      }
      const int b0 = bucket_of(cl.x, lo.x, wx, bx_), b1 = bucket_of(ch.x, lo.x, wx, bx_);
      const int c0 = bucket_of(cl.y, lo.y, wy, by_), c1 = bucket_of(ch.y, lo.y, wy, by_);
      for (int b = b0; b <= b1; ++b)
        for (int c = c0; c <= c1; ++c) buckets_[static_cast<std::size_t>(c) * bx_ + b].emplace_back(i, j);
    }
}

std::optional<PhaseInterpolator::Hit> PhaseInterpolator::locate(const Vec2& u) const {
  const double eps = 1e-9;
  const Vec2 span = bbox_.hi - bbox_.lo;
  if (u.x < bbox_.lo.x - eps * span.x || u.x > bbox_.hi.x + eps * span.x || u.y < bbox_.lo.y - eps * span.y ||
      u.y > bbox_.hi.y + eps * span.y)
    return std::nullopt;
  const int b = span.x > 0.0 ? std::clamp(static_cast<int>(std::floor((u.x - bbox_.lo.x) / (span.x / bx_))), 0, bx_ - 1) : 0;
  const int c = span.y > 0.0 ? std::clamp(static_cast<int>(std::floor((u.y - bbox_.lo.y) / (span.y / by_))), 0, by_ - 1) : 0;
  const PhaseMap& p = *phase_;
  for (const auto& [i, j] : buckets_[static_cast<std::size_t>(c) * bx_ + b]) {
    const Vec2 q00 = p.Q.at(i, j), q10 = p.Q.at(i + 1, j), q01 = p.Q.at(i, j + 1), q11 = p.Q.at(i + 1, j + 1);
    const double size = norm(q11 - q00) + norm(q10 - q01);
    double s = 0.5, t = 0.5;
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
      const Vec2 q = q00 * ((1 - s) * (1 - t)) + q10 * (s * (1 - t)) + q01 * ((1 - s) * t) + q11 * (s * t);
      const Vec2 r = q - u;
      if (norm(r) <= 1e-14 * std::max(size, 1.0)) {
        converged = true;
        break;
      }
      const Vec2 ds = (q10 - q00) * (1 - t) + (q11 - q01) * t;
      const Vec2 dt = (q01 - q00) * (1 - s) + (q11 - q10) * s;
      const double det = cross2(ds, dt);
      if (det == 0.0) break;
      s -= cross2(r, dt) / det;
      t -= cross2(ds, r) / det;
      if (std::abs(s) > 10.0 || std::abs(t) > 10.0) break;
    }
    if (!converged) continue;
    if (s < -eps || s > 1 + eps || t < -eps || t > 1 + eps) continue;
    return Hit{i, j, std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0)};
  }
  return std::nullopt;
}

std::optional<Vec2> PhaseInterpolator::gradient(const Vec2& u) const {
  const auto h = locate(u);
  if (!h) return std::nullopt;
  const Vec2 g00 = grad_.at(h->i, h->j), g10 = grad_.at(h->i + 1, h->j), g01 = grad_.at(h->i, h->j + 1),
             g11 = grad_.at(h->i + 1, h->j + 1);
  const double s = h->s, t = h->t;
  const Vec2 out = g00 * ((1 - s) * (1 - t)) + g10 * (s * (1 - t)) + g01 * ((1 - s) * t) + g11 * (s * t);
  if (!std::isfinite(out.x) || !std::isfinite(out.y)) return std::nullopt;
  return out;
}

std::optional<double> PhaseInterpolator::value(const Vec2& u) const {
  const auto h = locate(u);
  if (!h) return std::nullopt;
  const PhaseMap& p = *phase_;
  const double s = h->s, t = h->t;
  return p.phi.at(h->i, h->j) * (1 - s) * (1 - t) + p.phi.at(h->i + 1, h->j) * s * (1 - t) +
         p.phi.at(h->i, h->j + 1) * (1 - s) * t + p.phi.at(h->i + 1, h->j + 1) * s * t;
}

NecessaryResidual necessary_identity(const IncidentField& field, const Surface& rho, const OpticalConstants& constants,
                                     const Grid2D& grid, const Vec2& base) {
  constants.validate_lens();
  const double kappa = constants.kappa1();
  const FDStencil st = FDStencil::uniform(1e-4, 4);
  const VectorFn2 qfn = [&](const Vec2& x) { return midfield_at(field, rho, constants, x).Q; };
  const VectorFn2 omega = [&](const Vec2& x) {
    const Mat2 dq = fd_jacobian(qfn, x, st);
    return row_times(midfield_at(field, rho, constants, x).m.xy(), dq);
  };
  const ScalarGrid f = integrate_one_form(grid, omega, base, Axis::x1, 2);
  ScalarGrid target = nan_scalar_grid(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j) || std::isnan(f.at(i, j))) continue;
      const Vec2 x = grid.node(i, j);
      const MidPoint mp = midfield_at(field, rho, constants, x);
      target.at(i, j) = kappa * f.at(i, j) - rho.value(x) - kappa * mp.d;
    }
  NecessaryResidual out;
  auto get = [&](int a, int b) { return target.at(a, b); };
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.active(i, j)) continue;
      const double d1 = grid_diff<double>(grid, i, j, Axis::x1, get, true, kNaN);
      const double d2 = grid_diff<double>(grid, i, j, Axis::x2, get, true, kNaN);
      if (!std::isfinite(d1) || !std::isfinite(d2)) continue;
      const Vec3 e = field.direction(grid.node(i, j));
      out.max_residual = std::max(out.max_residual, norm(e.xy() - Vec2{d1, d2}));
      ++out.nodes;
    }
  return out;
}

}  // namespace hybridlens
