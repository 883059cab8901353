#pragma once

// Expansion of the non-symmetric branch at the Felli-Schneider point:
// u = u_* + eps phi + eps^2 psi, the coefficients b(mu_FS), L[psi] and
// c_{p,d}, the slopes tau'(mu_FS) and nu'(mu_FS), theta_2(p,d), xi^theta.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "ckn/analytic.hpp"
#include "ckn/error.hpp"
#include "ckn/spectral_ode.hpp"
#include "json.hpp"

namespace ckn {

// Closed forms of the integral ratios at mu_FS.
inline double b01_over_i2(double p) { return -p * (p - 2.0) / (2.0 * (p - 1.0) * (p + 2.0)); }
inline double b0pm1_over_ip(double p) { return -(p - 2.0) / (3.0 * p - 2.0); }
inline double b02pm3_over_ip(double p) {
  return -p * (p - 2.0) * (3.0 * p - 4.0) / ((p - 1.0) * (3.0 * p - 2.0) * (5.0 * p - 6.0));
}

/// <u^{p-2} phi^2> / <u^p> with phi = u^{p/2} f_1.
inline double a0_ratio(double mu, double p) { return p * p * mu / (3.0 * p - 2.0); }

/// <u^{p-4} phi^4> / <u^p> on the line (the f_1^4 sphere moment excluded).
inline double r4_ratio(double mu, double p) {
  return 2.0 * p * p * p * (p - 1.0) * mu * mu / ((3.0 * p - 2.0) * (5.0 * p - 6.0));
}

/// Quartic coefficient b(mu_FS), closed form.
inline double b_at_mu_fs(double p, int d) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p < critical_exponent(d), "b(mu_FS) requires 2 < p < 2*");
  const double dm1 = d - 1.0;
  const double num = 4.0 * dm1 * dm1 * p * p * p * (p - 1.0) * (p - 1.0) *
                     (2.0 * p * (5.0 * p - 6.0) - d * (p * p - 16.0 * p + 12.0));
  const double den = (d + 2.0) * (p + 2.0) * (p + 2.0) * (p - 2.0) * (3.0 * p - 2.0) *
                     (3.0 * p - 2.0) * (5.0 * p - 6.0);
  return num / den;
}

/// b(mu_FS) assembled from the two integral ratios a0 = <u^{p-2}phi^2>/<u^p>
/// and r4 = <u^{p-4}phi^4>/<u^p> (line integrals) and the sphere moments.
inline double b_from_ratios(double p, int d, double a0, double r4) {
  return (p - 1.0) * (0.25 * (p - 1.0) * (p - 2.0) * a0 * a0 -
                      d * (p - 2.0) * (p - 3.0) / (4.0 * (d + 2.0)) * r4);
}

inline double k_psi(double p, int d) {
  detail::require(p > 2.0, "k_psi requires p > 2");
  return -2.0 * p * p * (p - 1.0) * (d - 1.0) / ((p - 2.0) * (p + 2.0) * (3.0 * p - 2.0));
}

/// Upper bound for b_{2,2p-3} from the Poschl-Teller estimate.
inline double b22pm3_upper_bound(double p, int d) {
  const double ip = gamma_integrals(p).Ip;
  return ip * 16.0 * p * (p - 1.0) * (3.0 * p - 4.0) /
         ((3.0 * p - 2.0) * (5.0 * p - 6.0) * (7.0 * p - 10.0)) / sigma(p, d);
}

/// L[psi] as a function of b_{2,2p-3}.
inline double l_psi(double p, int d, double b22pm3) {
  const double y = b22pm3 / gamma_integrals(p).Ip;
  const double dm1 = d - 1.0;
  return 4.0 * dm1 * dm1 * (p - 1.0) * p * p * p / ((p + 2.0) * (p + 2.0)) *
         (p * (p - 2.0) / ((3.0 * p - 2.0) * (3.0 * p - 2.0) * (5.0 * p - 6.0)) +
          2.0 * dm1 / (d + 2.0) * (p - 1.0) / ((p - 2.0) * (p - 2.0)) * y);
}

inline double l_psi_approx(double p, int d) { return l_psi(p, d, b22pm3_upper_bound(p, d)); }

struct CResult {
  double c = 0.0;
  double denominator = 0.0;  // b - L/2
  bool hypothesis_H = false;
};

/// c = (p^2-4) / (8 (b - L/2)); (H) fails when |b - L/2| < 1e-10 max(|b|,|L|).
inline CResult c_from(double p, double b, double L) {
  CResult r;
  r.denominator = b - 0.5 * L;
  r.hypothesis_H = std::abs(r.denominator) >= 1e-10 * std::max(std::abs(b), std::abs(L));
  if (r.hypothesis_H) r.c = (p * p - 4.0) / (8.0 * r.denominator);
  return r;
}

/// Largest real root in (2, 2*) of the sufficient-condition quartic
/// (103d^2-227d+54)p^4 - 16(25d^2-37d+18)p^3 + 8(46d^2-67d+63)p^2
///   + 32(d+3)(5d-3)p - 240d(d+1),
/// the numerator of b(mu_FS) - L_approx[psi]/2 after clearing denominators.
inline double p_approx(int d) {
  detail::require(d >= 3, "p_approx requires d >= 3");
  const double D = d;
  const double c4 = 103 * D * D - 227 * D + 54;
  const double c3 = -16 * (25 * D * D - 37 * D + 18);
  const double c2 = 8 * (46 * D * D - 67 * D + 63);
  const double c1 = 32 * (D + 3) * (5 * D - 3);
  const double c0 = -240 * D * (D + 1);
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(0, 0) = -c3 / c4;
  comp(0, 1) = -c2 / c4;
  comp(0, 2) = -c1 / c4;
  comp(0, 3) = -c0 / c4;
  comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
  const Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  const double pc = critical_exponent(d);
  auto f = [&](double x) { return (((c4 * x + c3) * x + c2) * x + c1) * x + c0; };
  std::optional<double> best;
  for (int i = 0; i < 4; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-9 * std::abs(z)) continue;
    double x = z.real();
    if (x <= 2.0 || x >= pc) continue;
    for (int k = 0; k < 3; ++k) {  // polish
      const double df = ((4 * c4 * x + 3 * c3) * x + 2 * c2) * x + c1;
      x -= f(x) / df;
    }
    if (!best || x > *best) best = x;
  }
  if (!best) throw solver_error("p_approx: no real root of the quartic in (2, 2*)");
  return *best;
}

/// tau'(mu_FS) on the non-symmetric branch, with b_{0,1}/I_2 as input.
inline double tau_prime_fs(double p, int d, double c, double b01_i2) {
  if (!(c > 0.0)) throw domain_error("tau'(mu_FS) requires c_{p,d} > 0");
  const double k = 8.0 * p * (d - 1.0) / ((p - 2.0) * (p + 2.0) * (p + 2.0));
  return (p - 2.0) / (p + 2.0) -
         c * k * k * (1.0 + (p - 1.0) * p * (p + 2.0) / (2.0 * (p - 2.0)) * b01_i2);
}

inline double tau_prime_fs(double p, int d, double c) {
  return tau_prime_fs(p, d, c, b01_over_i2(p));
}

/// B_0 / alpha at mu, with eps^2/(2 eta) = 1/2.
inline double b0_over_alpha(double mu, double p) {
  return (p - 1.0) * p * p * mu / (2.0 * (p - 2.0));
}

/// nu'(mu_FS) / nu*(mu_FS) on the non-symmetric branch.
inline double nu_prime_ratio_fs(double p, int d, double c, double b01_i2) {
  if (!(c > 0.0)) throw domain_error("nu'(mu_FS) requires c_{p,d} > 0");
  const double m = mu_fs(p, d);
  return -(p - 2.0) / (2.0 * p * m) +
         c * (p * m * (2.0 / (p + 2.0) - p * (p - 1.0) / (3.0 * p - 2.0)) +
              2.0 * b0_over_alpha(m, p) * (b01_i2 + (p - 2.0) / (3.0 * p - 2.0)));
}

inline double nu_prime_ratio_fs(double p, int d, double c) {
  return nu_prime_ratio_fs(p, d, c, b01_over_i2(p));
}

/// Largest absolute deviation in the pair of identities
/// nu*'/nu* + tau*'/(mu+tau*) = 0 and nu'/nu* + tau'/(mu+tau*) = 0 at mu_FS.
inline double rem2_identity_residual(double p, int d, double c, double b01_i2) {
  const double m = mu_fs(p, d);
  const double ts = tau_star(m, p);
  const double sym = -(p - 2.0) / (2.0 * p * m) + ((p - 2.0) / (p + 2.0)) / (m + ts);
  const double full = nu_prime_ratio_fs(p, d, c, b01_i2) + tau_prime_fs(p, d, c, b01_i2) / (m + ts);
  return std::max(std::abs(sym), std::abs(full));
}

inline double theta2_from_tau_prime(double tp) {
  if (!(tp > 0.0))
    throw domain_error("theta_2 undefined: tau'(mu_FS) = " + std::to_string(tp) + " is not positive");
  return tp / (1.0 + tp);
}

/// xi^theta(mu_FS), sign of the relative curvature of the two branches.
inline double xi_theta(double theta, double p, int d, double c, double theta2) {
  const double m = mu_fs(p, d);
  const double den = 2.0 * p * theta - (p - 2.0);
  detail::require(den > 0.0, "xi^theta requires theta > (p-2)/(2p)");
  const double t = 2.0 * p * theta2 - (p - 2.0);
  return -0.25 * (p * p - 4.0) * c +
         (p + 2.0) / (4.0 * p * p * m * m) * (1.0 - theta) * t * t /
             ((1.0 - theta2) * (1.0 - theta2) * den);
}

/// (Lambda^theta)'(mu_FS) = theta (1 + tau') - tau'.
inline double lambda_theta_slope_fs(double theta, double tau_prime) {
  return theta * (1.0 + tau_prime) - tau_prime;
}

inline double energy_ratio_prediction(double mu, double p, int d, double c) {
  const double dm = mu - mu_fs(p, d);
  return 1.0 - (p * p - 4.0) * c * dm * dm / 8.0;
}

struct ExpansionOptions {
  int chi_points = 4001;
  bool richardson = true;
};

struct ExpansionReport {
  double p = 0.0;
  int d = 0;
  double mu_fs = 0.0;
  double b_mu_fs = 0.0;
  double b01 = 0.0;
  double b0pm1 = 0.0;
  double b02pm3 = 0.0;
  double b22pm3 = 0.0;
  double b22pm3_bound = 0.0;
  double a0 = 0.0;
  double sigma = 0.0;
  double L_psi = 0.0;
  double L_psi_approx = 0.0;
  std::optional<double> c_pd;
  std::optional<double> c_pd_approx;
  bool hypothesis_H = false;
  double k_psi = 0.0;
  std::optional<double> tau_prime;
  std::optional<double> nu_prime_ratio;
  std::optional<double> theta2;
  double I2 = 0.0;
  double Ip = 0.0;
};

inline ExpansionReport compute_expansion(double p, int d, const ExpansionOptions& opt = {}) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p < critical_exponent(d), "expansion requires 2 < p < 2*");
  ExpansionReport r;
  r.p = p;
  r.d = d;
  r.mu_fs = mu_fs(p, d);
  const auto gi = gamma_integrals(p);
  r.I2 = gi.I2;
  r.Ip = gi.Ip;
  r.b_mu_fs = b_at_mu_fs(p, d);
  r.a0 = a0_ratio(r.mu_fs, p);
  r.sigma = sigma(p, d);
  r.k_psi = k_psi(p, d);

  const LineGrid g = default_chi_grid(p, d, opt.chi_points);
  const auto c02 = solve_chi(ChiKind::chi_0_2pm3, p, d, g);
  r.b01 = c02.moment(1.0);
  r.b0pm1 = c02.moment(p - 1.0);
  r.b02pm3 = c02.moment(2.0 * p - 3.0);
  const double b22 = solve_chi(ChiKind::chi_2_2pm3, p, d, g).moment(2.0 * p - 3.0);
  if (opt.richardson) {
    const LineGrid fine = make_line_grid(g.half_width, 2 * g.n - 1);
    const double b22f = solve_chi(ChiKind::chi_2_2pm3, p, d, fine).moment(2.0 * p - 3.0);
    r.b22pm3 = b22f + (b22f - b22) / 15.0;
  } else {
    r.b22pm3 = b22;
  }
  r.b22pm3_bound = b22pm3_upper_bound(p, d);
  r.L_psi = l_psi(p, d, r.b22pm3);
  r.L_psi_approx = l_psi_approx(p, d);

  const auto cr = c_from(p, r.b_mu_fs, r.L_psi);
  r.hypothesis_H = cr.hypothesis_H;
  if (cr.hypothesis_H) r.c_pd = cr.c;
  const auto ca = c_from(p, r.b_mu_fs, r.L_psi_approx);
  if (ca.hypothesis_H) r.c_pd_approx = ca.c;
  if (r.c_pd && *r.c_pd > 0.0) {
    const double b01r = r.b01 / r.I2;
    r.tau_prime = tau_prime_fs(p, d, *r.c_pd, b01r);
    r.nu_prime_ratio = nu_prime_ratio_fs(p, d, *r.c_pd, b01r);
    if (*r.tau_prime > 0.0) r.theta2 = theta2_from_tau_prime(*r.tau_prime);
  }
  return r;
}

inline nlohmann::json to_json(const ExpansionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json j;
  j["p"] = r.p;
  j["d"] = r.d;
  j["b_mu_fs"] = r.b_mu_fs;
  j["b01"] = r.b01;
  j["b0pm1"] = r.b0pm1;
  j["b02pm3"] = r.b02pm3;
  j["b22pm3"] = r.b22pm3;
  j["a0"] = r.a0;
  j["sigma"] = r.sigma;
  j["L_psi"] = r.L_psi;
  j["L_psi_approx"] = r.L_psi_approx;
  j["c_pd"] = opt(r.c_pd);
  j["c_pd_approx"] = opt(r.c_pd_approx);
  j["hypothesis_H"] = r.hypothesis_H;
  j["k_psi"] = r.k_psi;
  j["tau_prime"] = opt(r.tau_prime);
  j["nu_prime_ratio"] = opt(r.nu_prime_ratio);
  j["theta2"] = opt(r.theta2);
  j["mu_fs"] = r.mu_fs;
  j["b22pm3_bound"] = r.b22pm3_bound;
  return j;
}

/// Approximate minimizer u_* + eps phi_1 f_1 + eps^2 psi near mu_FS.
struct AnsatzFunction {
  double mu = 0.0;
  double eps = 0.0;
  SymmetricExtremal sym;
  HarmonicConstants harm;
  double A0 = 0.0, B0 = 0.0, B2 = 0.0;
  double k_psi = 0.0;
  std::shared_ptr<const ChiProfile> chi_0_pm1, chi_0_2pm3, chi_2_2pm3;

  double u_star(double s) const { return sym(s); }
  double phi1(double s) const { return std::pow(sym(s), 0.5 * sym.p); }
  double psi0(double s) const {
    const double x = sym.beta * s;
    return A0 * chi_0_pm1->at_rescaled(x) + B0 * chi_0_2pm3->at_rescaled(x);
  }
  double psi2(double s) const { return B2 * chi_2_2pm3->at_rescaled(sym.beta * s); }
  /// psi = k_psi u_* f_0 + psi_0 f_0 + psi_2 f_2.
  double psi(double s, double zeta) const {
    return k_psi * sym(s) + psi0(s) + psi2(s) * harm.f(2, zeta);
  }
  double phi(double s, double zeta) const { return phi1(s) * harm.f(1, zeta); }
  double operator()(double s, double zeta) const {
    return sym(s) + eps * phi(s, zeta) + eps * eps * psi(s, zeta);
  }
};

/// Coefficients of psi at mu with eps^2/(2 eta) = 1/2 and lambda_1 dropped.
struct PsiCoefficients {
  double A0, B0, B2;
};

inline PsiCoefficients psi_coefficients(double mu, double p, int d) {
  const auto u = symmetric_extremal(mu, p);
  const double b2 = u.beta * u.beta;
  const double B0 = 0.5 * (p - 1.0) * (p - 2.0) * std::pow(u.alpha, 2.0 * p - 3.0) / b2;
  const double A0 =
      0.5 * std::pow(u.alpha, p - 1.0) / b2 * p * p * (p - 1.0) * (p - 2.0) * mu / (3.0 * p - 2.0);
  return {A0, B0, harmonic_constants(d).kappa_d * B0};
}

inline AnsatzFunction build_ansatz(double mu, double p, int d, double c,
                                   const LineGrid& chi_grid) {
  const double m = mu_fs(p, d);
  if (mu < m) throw domain_error("ansatz is one-sided: requires mu >= mu_FS");
  if (!(c > 0.0)) throw domain_error("ansatz requires c_{p,d} > 0");
  AnsatzFunction a;
  a.mu = mu;
  a.eps = std::sqrt(c * (mu - m));
  a.sym = symmetric_extremal(mu, p);
  a.harm = harmonic_constants(d);
  const auto pc = psi_coefficients(mu, p, d);
  a.A0 = pc.A0;
  a.B0 = pc.B0;
  a.B2 = pc.B2;
  a.k_psi = k_psi(p, d);
  a.chi_0_pm1 = std::make_shared<ChiProfile>(solve_chi(ChiKind::chi_0_pm1, p, d, chi_grid));
  a.chi_0_2pm3 = std::make_shared<ChiProfile>(solve_chi(ChiKind::chi_0_2pm3, p, d, chi_grid));
  a.chi_2_2pm3 = std::make_shared<ChiProfile>(solve_chi(ChiKind::chi_2_2pm3, p, d, chi_grid));
  return a;
}

inline AnsatzFunction build_ansatz(double mu, double p, int d) {
  const auto r = compute_expansion(p, d);
  if (!r.c_pd) throw domain_error("ansatz requires hypothesis (H)");
  return build_ansatz(mu, p, d, *r.c_pd, default_chi_grid(p, d));
}

/// L[psi] evaluated from its integral definition on the line:
/// (p-1)(p-2) <u^{p-3} phi^2 psi~> / <u^p>, with psi~ = psi_0 f_0 + psi_2 f_2.
inline double l_psi_from_profiles(const AnsatzFunction& a, const LineGrid& g) {
  const double p = a.sym.p;
  std::vector<double> num(g.n), den(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double s = g.node(i);
    const double u = a.sym(s);
    const double ph2 = std::pow(u, p);
    num[i] = std::pow(u, p - 3.0) * ph2 * (a.psi0(s) + a.harm.kappa_d * a.psi2(s));
    den[i] = ph2;
  }
  return (p - 1.0) * (p - 2.0) * quadrature(num, g) / quadrature(den, g);
}

/// 2 q[psi~] / <u^p>, q the second variation at u_*; equals L[psi] at the
/// optimal psi. Derivatives by fourth-order central differences.
inline double two_q_from_profiles(const AnsatzFunction& a, const LineGrid& g) {
  const double p = a.sym.p, mu = a.mu;
  const int d = a.harm.d;
  std::vector<double> f0(g.n), f2(g.n), u(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double s = g.node(i);
    f0[i] = a.psi0(s);
    f2[i] = a.psi2(s);
    u[i] = a.sym(s);
  }
  auto deriv = [&](const std::vector<double>& f, int i) {
    auto at = [&](int k) { return (k < 0 || k >= g.n) ? 0.0 : f[k]; };
    return (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * g.spacing);
  };
  std::vector<double> q(g.n), up(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double pot = (p - 1.0) * std::pow(u[i], p - 2.0);
    const double d0 = deriv(f0, i), d2 = deriv(f2, i);
    q[i] = d0 * d0 + (mu - pot) * f0[i] * f0[i] + d2 * d2 + (mu + 2.0 * d - pot) * f2[i] * f2[i];
    up[i] = std::pow(u[i], p);
  }
  return 2.0 * quadrature(q, g) / quadrature(up, g);
}

struct Psi1Diagnostic {
  double max_abs_psi1 = 0.0;
  double multiplier = 0.0;
  double forcing_moment = 0.0;  // int f_1^3 dnu
};

/// Solves the f_1 component equation at mu_FS with the orthogonality
/// constraint int phi_1 psi_1 = 0 and a Lagrange multiplier, confirming the
/// zero solution. The forcing is proportional to int f_1^3 dnu.
inline Psi1Diagnostic psi1_diagnostic(double p, int d, const LineGrid& grid) {
  const double m = mu_fs(p, d);
  const auto u = symmetric_extremal(m, p);
  const auto h = harmonic_constants(d);
  // int f_1^3 dnu by Simpson on [0, pi]
  const LineGrid zg = make_line_grid(pi / 2, 2001);
  std::vector<double> f3(zg.n);
  for (int i = 0; i < zg.n; ++i) {
    const double z = zg.node(i) + pi / 2;
    f3[i] = std::pow(h.f(1, z), 3) * std::pow(std::sin(z), d - 2) / h.z_d;
  }
  Psi1Diagnostic out;
  out.forcing_moment = quadrature(f3, zg);
  const double b2 = u.beta * u.beta;
  std::vector<double> V(grid.n), g(grid.n), ph(grid.n);
  const LineGrid rg = make_line_grid(u.beta * grid.half_width, grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double s = grid.node(i);
    const double us = u(s);
    V[i] = (m + d - 1.0 - (p - 1.0) * std::pow(us, p - 2.0)) / b2;
    ph[i] = std::pow(us, 0.5 * p);
    g[i] = 0.5 * (p - 1.0) * (p - 2.0) * out.forcing_moment * std::pow(us, p - 3.0) * ph[i] * ph[i] / b2;
  }
  std::vector<double> phs(grid.n);
  for (int i = 0; i < grid.n; ++i) phs[i] = ph[i] / b2;
  const auto y1 = detail::numerov_even(V, g, rg.spacing);
  const auto y2 = detail::numerov_even(V, phs, rg.spacing);
  std::vector<double> a(grid.n), b(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    a[i] = ph[i] * y1[i];
    b[i] = ph[i] * y2[i];
  }
  out.multiplier = quadrature(a, rg) / quadrature(b, rg);
  for (int i = 0; i < grid.n; ++i)
    out.max_abs_psi1 = std::max(out.max_abs_psi1, std::abs(y1[i] - out.multiplier * y2[i]));
  return out;
}

}  // namespace ckn
