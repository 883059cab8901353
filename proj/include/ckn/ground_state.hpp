#pragma once

// Radial ground state of -u'' - (d-1)/r u' + u = u^{p-1} on R^d by shooting
// on u(0), and the Gagliardo-Nirenberg constants derived from it.
//
// Integrals over R^d use dx = r^{d-1} dr dnu(omega) with nu the probability
// measure on the sphere, the same convention as on the cylinder.

#include <array>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "ckn/analytic.hpp"
#include "ckn/error.hpp"

namespace ckn {

struct GroundState {
  double p = 0.0;
  int d = 0;
  double u0 = 0.0;
  std::vector<double> r;
  std::vector<double> u;
  double grad2 = 0.0;  // int |u'|^2
  double mass2 = 0.0;  // int u^2
  double massp = 0.0;  // int u^p
  double S_p = 0.0;
  double K_GN = 0.0;

  /// (int|grad u|^2 + int u^2 - int u^p) / int u^p, zero for exact solutions.
  double pohozaev_defect() const { return (grad2 + mass2 - massp) / massp; }
  /// K_GN^{-1} evaluated directly on the GN quotient of the ground state.
  double inverse_k_gn_direct() const {
    const double th = vartheta(p, d);
    return std::pow(grad2, th) * std::pow(mass2, 1.0 - th) / std::pow(massp, 2.0 / p);
  }
};

struct ShootOptions {
  double r_max = 60.0;
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double bisection_tol = 1e-12;
  double r_start = 1e-4;
};

namespace detail {

enum class ShootOutcome { overshoot, undershoot, undecided };

struct ShootResult {
  ShootOutcome outcome;
  std::array<double, 5> state;  // u, u', int r^{d-1}u'^2, int r^{d-1}u^2, int r^{d-1}u^p
  std::vector<double> r, u;
};

inline ShootResult shoot_once(double u0, double p, int d, const ShootOptions& opt,
                              bool keep_profile) {
  using State = std::array<double, 5>;
  namespace odeint = boost::numeric::odeint;
  auto rhs = [p, d](const State& x, State& dx, double r) {
    const double u = x[0], v = x[1];
    const double up = std::pow(std::abs(u), p - 2.0) * u;
    const double rd = std::pow(r, d - 1);
    dx[0] = v;
    dx[1] = -(d - 1.0) / r * v + u - up;
    dx[2] = rd * v * v;
    dx[3] = rd * u * u;
    dx[4] = rd * std::pow(std::abs(u), p);
  };
  // Taylor start: u(r) = u0 + (u0 - u0^{p-1}) r^2 / (2d)
  const double r0 = opt.r_start;
  const double a = (u0 - std::pow(u0, p - 1.0)) / (2.0 * d);
  State x{u0 + a * r0 * r0, 2.0 * a * r0, 0.0, 0.0, 0.0};
  const double rd0 = std::pow(r0, d);
  x[3] = rd0 / d * u0 * u0;
  x[4] = rd0 / d * std::pow(u0, p);

  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                         odeint::runge_kutta_dopri5<State>());
  ShootResult res{ShootOutcome::undecided, x, {}, {}};
  double r = r0, dt = 1e-3;
  if (keep_profile) {
    res.r.push_back(0.0);
    res.u.push_back(u0);
  }
  State last = x;
  while (r < opt.r_max) {
    double rn = r;
    State xn = x;
    const auto fail = stepper.try_step(rhs, xn, rn, dt);
    if (fail == odeint::fail) continue;
    if (xn[0] < 0.0) {
      res.outcome = ShootOutcome::overshoot;
      res.state = last;
      return res;
    }
    if (xn[1] > 0.0) {
      res.outcome = ShootOutcome::undershoot;
      res.state = xn;
      return res;
    }
    last = x = xn;
    r = rn;
    if (keep_profile) {
      res.r.push_back(r);
      res.u.push_back(x[0]);
    }
    dt = std::min(dt, 0.25);
  }
  res.state = x;
  return res;
}

}  // namespace detail

inline GroundState ground_state_shoot(double p, int d, const ShootOptions& opt = {}) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p < critical_exponent(d),
                  "ground state requires 2 < p < 2* (no ground state at the critical exponent)");
  using detail::ShootOutcome;
  // Bracket: small data undershoots, large data overshoots.
  double lo = 1.0 + 1e-9;
  double hi = std::pow(p / 2.0, 1.0 / (p - 2.0)) * 2.0;
  int grow = 0;
  while (detail::shoot_once(hi, p, d, opt, false).outcome != ShootOutcome::overshoot) {
    hi *= 2.0;
    if (++grow > 60) throw solver_error("ground state shooting: no overshooting initial value found");
  }
  if (detail::shoot_once(lo, p, d, opt, false).outcome != ShootOutcome::undershoot)
    throw solver_error("ground state shooting: lower bracket does not undershoot");
  while (hi - lo > opt.bisection_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const auto o = detail::shoot_once(mid, p, d, opt, false).outcome;
    if (o == ShootOutcome::overshoot)
      hi = mid;
    else if (o == ShootOutcome::undershoot)
      lo = mid;
    else
      break;
  }
  const auto best = detail::shoot_once(lo, p, d, opt, true);
  GroundState gs;
  gs.p = p;
  gs.d = d;
  gs.u0 = lo;
  gs.r = best.r;
  gs.u = best.u;
  gs.grad2 = best.state[2];
  gs.mass2 = best.state[3];
  gs.massp = best.state[4];
  gs.S_p = (gs.grad2 + gs.mass2) / std::pow(gs.massp, 2.0 / p);
  const double th = vartheta(p, d);
  gs.K_GN = 1.0 / (std::pow(th, th) * std::pow(1.0 - th, 1.0 - th) * gs.S_p);
  return gs;
}

}  // namespace ckn
