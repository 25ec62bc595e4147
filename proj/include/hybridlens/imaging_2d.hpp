#pragma once
// The imaging problem in one source dimension:
//   ρ′(t) = κ₁S(t)/(sqrt(S² + (a − ρ)²) − κ₁(a − ρ)),  a − ρ(0) = z₀,
// and the exact solution for S(t) = αt. Templated on the scalar type so the
// same code runs in double and in quad precision.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "hybridlens/errors.hpp"
#include "hybridlens/snell.hpp"

namespace hybridlens {

template <class Real>
struct Profile2D {
  std::vector<Real> t;
  std::vector<Real> rho;
};

namespace detail {

template <class Real>
double to_double(const Real& v) {
  return static_cast<double>(v);
}

template <class Real>
void check_feasible_2d(const Real& s, const Real& z, const Real& kappa1, const Real& a, const Real& t) {
  using std::abs;
  using std::sqrt;
  if (!(z < a) || !(z * sqrt(kappa1 * kappa1 - 1) > abs(s))) {
    std::ostringstream msg;
    msg << "solve_rho_2d: a > a - rho > |S|/sqrt(kappa1^2 - 1) fails at t = " << to_double(t)
        << " (a - rho = " << to_double(z) << ")";
    throw FeasibilityViolation(msg.str(), to_double(t), 0.0);
  }
}

}  // namespace detail

/// Classical RK4 from t = 0 toward t_lo and toward t_hi (t_lo ≤ 0 ≤ t_hi).
/// The step is shortened so each side is covered by a whole number of steps.
/// FeasibilityViolation reports the first offending t.
template <class Real, class SFn>
Profile2D<Real> solve_rho_2d(SFn S, Real kappa1, Real a, Real z0, Real t_lo, Real t_hi, Real step) {
  using std::ceil;
  using std::sqrt;
  if (!(kappa1 > 1) || !(a > 0)) throw InvalidArgument("solve_rho_2d: need kappa1 > 1 and a > 0");
  if (!(t_lo <= 0) || !(t_hi >= 0) || !(step > 0)) throw InvalidArgument("solve_rho_2d: need t_lo <= 0 <= t_hi, step > 0");
  detail::check_feasible_2d<Real>(S(Real(0)), z0, kappa1, a, Real(0));

  auto f = [&](const Real& t, const Real& rho) {
    const Real s = S(t);
    const Real z = a - rho;
    return kappa1 * s / (sqrt(s * s + z * z) - kappa1 * z);
  };
  auto march = [&](Real t_end, std::vector<Real>& ts, std::vector<Real>& rs) {
    if (t_end == 0) return;
    using std::abs;
    const long n = static_cast<long>(detail::to_double(ceil(abs(t_end) / step - Real(1e-9))));
    const Real h = t_end / Real(n);
    Real rho = a - z0;
    for (long i = 0; i < n; ++i) {
      const Real t = h * Real(i);
      const Real k1 = f(t, rho);
      const Real k2 = f(t + h / 2, rho + h / 2 * k1);
      const Real k3 = f(t + h / 2, rho + h / 2 * k2);
      const Real k4 = f(t + h, rho + h * k3);
      rho += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      const Real tn = i + 1 == n ? t_end : h * Real(i + 1);
      detail::check_feasible_2d<Real>(S(tn), a - rho, kappa1, a, tn);
      ts.push_back(tn);
      rs.push_back(rho);
    }
  };

  std::vector<Real> tl, rl, th, rh;
  march(t_lo, tl, rl);
  march(t_hi, th, rh);
  Profile2D<Real> out;
  out.t.assign(tl.rbegin(), tl.rend());
  out.rho.assign(rl.rbegin(), rl.rend());
  out.t.push_back(Real(0));
  out.rho.push_back(a - z0);
  out.t.insert(out.t.end(), th.begin(), th.end());
  out.rho.insert(out.rho.end(), rh.begin(), rh.end());
  return out;
}

/// Convenience overload over OpticalConstants (κ₁ and a).
template <class SFn>
Profile2D<double> solve_rho_2d(SFn S, const OpticalConstants& c, double t_lo, double t_hi, double z0, double step) {
  return solve_rho_2d<double>(S, c.kappa1(), c.a, z0, t_lo, t_hi, step);
}

/// a − ρ(t) for S(t) = αt. With ρ̃ = a − ρ the equation is ρ̃′ = F(t/ρ̃),
/// F(v) = κ₁αv/(κ₁ − sqrt(α²v² + 1)); v = t/ρ̃ separates it into
///   ln(ρ̃/z₀) = G(v) = ∫₀^v F(u)/(1 − uF(u)) du,   t = v z₀ exp(G(v)).
/// G uses adaptive Gauss–Kronrod; v is found by TOMS 748.
template <class Real>
Real explicit_dilation_2d(Real alpha, Real kappa1, Real a, Real z0, Real t,
                          Real tol = Real(1000) * std::numeric_limits<Real>::epsilon()) {
  using std::abs;
  using std::exp;
  using std::sqrt;
  if (!(kappa1 > 1) || !(z0 > 0) || !(a > z0)) throw InvalidArgument("explicit_dilation_2d: need kappa1 > 1, a > z0 > 0");
  if (t == 0 || alpha == 0) return z0;

  auto F = [&](const Real& v) { return kappa1 * alpha * v / (kappa1 - sqrt(alpha * alpha * v * v + 1)); };
  auto integrand = [&](const Real& u) {
    const Real fu = F(u);
    return fu / (1 - u * fu);
  };
  auto G = [&](const Real& v) {
    Real err = 0;
    const Real g =
        boost::math::quadrature::gauss_kronrod<Real, 31>::integrate(integrand, Real(0), v, 12, tol, &err);
    if (!(err <= Real(100) * tol * (1 + abs(g)))) {
      std::ostringstream msg;
      msg << "explicit_dilation_2d: quadrature error estimate " << detail::to_double(err) << " at v = "
          << detail::to_double(v);
      throw QuadratureFailure(msg.str());
    }
    return g;
  };
  // v stays where the denominators are positive: α²v² < κ₁² − 1 (feasibility)
  // and 1 − vF(v) > 0 (t monotone in v).
  auto admissible = [&](const Real& v) {
    return alpha * alpha * v * v < kappa1 * kappa1 - 1 && 1 - v * F(v) > 0;
  };
  auto residual = [&](const Real& v) { return v * z0 * exp(G(v)) - t; };

  // |v| = |t|/ρ̃ > |t|/a, so t/a undershoots; grow toward the root, halving
  // back whenever a candidate leaves the admissible range.
  const Real sign = t > 0 ? Real(1) : Real(-1);
  Real lo = t / a;
  Real hi = lo;
  for (int guard = 0;; ++guard) {
    if (guard > 400) throw QuadratureFailure("explicit_dilation_2d: cannot bracket v");
    Real cand = lo * Real(1.5);
    int shrink = 0;
    while (!admissible(cand)) {
      cand = (lo + cand) / 2;
      if (++shrink > 60) {
        std::ostringstream msg;
        msg << "explicit_dilation_2d: trajectory leaves the feasible region before t = " << detail::to_double(t);
        throw FeasibilityViolation(msg.str(), detail::to_double(t), 0.0);
      }
    }
    if (sign * residual(cand) >= 0) {
      hi = cand;
      break;
    }
    lo = cand;
  }
  if (sign < 0) std::swap(lo, hi);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(residual, lo, hi,
                                                   boost::math::tools::eps_tolerance<Real>(std::numeric_limits<Real>::digits - 3),
                                                   iters);
  const Real v = (r.first + r.second) / 2;
  const Real z = z0 * exp(G(v));
  if (!(z < a)) {
    throw FeasibilityViolation("explicit_dilation_2d: a - rho reaches a", detail::to_double(t), 0.0);
  }
  return z;
}

}  // namespace hybridlens
