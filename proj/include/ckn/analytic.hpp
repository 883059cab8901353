#pragma once

// Closed-form quantities: exponents and thresholds, sech-power integrals,
// the explicit symmetric extremals and their branch, and the zonal spherical
// harmonics used by the expansion.

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "ckn/error.hpp"

namespace ckn {

inline constexpr double pi = std::numbers::pi;

/// 2* = 2d/(d-2).
inline double critical_exponent(int d) {
  detail::require(d >= 3, "dimension d must be >= 3");
  return 2.0 * d / (d - 2.0);
}

/// The Gagliardo-Nirenberg exponent d(p-2)/(2p).
inline double vartheta(double p, int d) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p <= critical_exponent(d) * (1 + 1e-14),
                  "p must lie in (2, 2d/(d-2)]");
  return d * (p - 2.0) / (2.0 * p);
}

/// Parameter triple (d, p, theta). The constructor rejects anything outside
/// d >= 3, 2 < p <= 2*, vartheta(p,d) <= theta <= 1.
class ProblemParams {
 public:
  static constexpr double theta_slack = 1e-12;

  ProblemParams(int d, double p, double theta = 1.0) : d_(d), p_(p), theta_(theta) {
    detail::require(d >= 3, "dimension d must be >= 3");
    const double pc = critical_exponent(d);
    if (!(p > 2.0 && p <= pc * (1 + 1e-14))) {
      std::ostringstream os;
      os << "p = " << p << " outside admissible interval (2, " << pc << "]";
      throw domain_error(os.str());
    }
    const double vt = ckn::vartheta(p, d);
    if (!(theta >= vt - theta_slack && theta <= 1.0 + theta_slack)) {
      std::ostringstream os;
      os.precision(10);
      os << "theta = " << theta << " outside admissible interval [" << vt << ", 1]";
      throw domain_error(os.str());
    }
  }

  int d() const { return d_; }
  double p() const { return p_; }
  double theta() const { return theta_; }
  double critical() const { return critical_exponent(d_); }
  double vartheta() const { return ckn::vartheta(p_, d_); }
  double a_c() const { return (d_ - 2.0) / 2.0; }

 private:
  int d_;
  double p_;
  double theta_;
};

/// Weights (a, b) of the inequality on R^d.
struct CknWeights {
  double a;
  double b;
  int d;
};

struct CylinderExponents {
  double p;
  double Lambda;
};

/// Emden-Fowler change of variables: (a, b, d) -> (p(a,b), (a - a_c)^2).
inline CylinderExponents ckn_to_cylinder(const CknWeights& w) {
  detail::require(w.d >= 3, "dimension d must be >= 3");
  const double ac = (w.d - 2.0) / 2.0;
  detail::require(w.a < ac, "weight a must satisfy a < a_c = (d-2)/2");
  detail::require(w.b >= w.a && w.b <= w.a + 1.0, "weight b must lie in [a, a+1]");
  const double p = 2.0 * w.d / (w.d - 2.0 + 2.0 * (w.b - w.a));
  detail::require(p > 2.0, "p(a,b) must exceed 2 (b = a+1 is excluded)");
  return {p, (w.a - ac) * (w.a - ac)};
}

/// Felli-Schneider value 4(d-1)/(p^2-4) where the linearization loses stability.
inline double mu_fs(double p, int d) {
  detail::require(p > 2.0, "mu_FS requires p > 2");
  return 4.0 * (d - 1.0) / (p * p - 4.0);
}

inline double lambda_fs(double p, double theta, int d) {
  return mu_fs(p, d) * ((2.0 * theta - 1.0) * p + 2.0) / (p + 2.0);
}

/// f(q) = int_R sech^q = sqrt(pi) Gamma(q/2) / Gamma((q+1)/2).
inline double gamma_f(double q) {
  detail::require(q > 0.0, "gamma_f requires q > 0");
  return std::sqrt(pi) * std::exp(std::lgamma(0.5 * q) - std::lgamma(0.5 * (q + 1.0)));
}

/// int_R w^q with w = sech^{2/(p-2)}.
inline double w_power_integral(double p, double q) {
  detail::require(p > 2.0, "p must exceed 2");
  return gamma_f(2.0 * q / (p - 2.0));
}

struct GammaIntegrals {
  double I2;
  double Ip;
  double J2;
};

inline GammaIntegrals gamma_integrals(double p) {
  detail::require(p > 2.0, "gamma_integrals requires p > 2");
  const double I2 = gamma_f(4.0 / (p - 2.0));
  return {I2, 4.0 * I2 / (p + 2.0), 4.0 * I2 / ((p + 2.0) * (p - 2.0))};
}

/// u(s) = alpha * sech(beta s)^{2/(p-2)}, the even positive solution of
/// -u'' + mu u = u^{p-1} on the line.
struct SymmetricExtremal {
  double mu;
  double p;
  double alpha;
  double beta;

  double operator()(double s) const {
    return alpha * std::pow(std::cosh(beta * s), -2.0 / (p - 2.0));
  }
  double derivative(double s) const {
    return -2.0 * beta / (p - 2.0) * std::tanh(beta * s) * (*this)(s);
  }
  double second_derivative(double s) const {
    const double u = (*this)(s);
    return mu * u - std::pow(u, p - 1.0);
  }
};

inline SymmetricExtremal symmetric_extremal(double mu, double p) {
  detail::require(mu > 0.0, "symmetric extremal requires mu > 0");
  detail::require(p > 2.0, "symmetric extremal requires p > 2");
  return {mu, p, std::pow(0.5 * p * mu, 1.0 / (p - 2.0)), 0.5 * (p - 2.0) * std::sqrt(mu)};
}

/// kappa_p with nu*(mu) = kappa_p mu^{-(p-2)/(2p)}.
inline double kappa_p(double p) {
  const auto g = gamma_integrals(p);
  return std::pow((p + 2.0) / 4.0, 2.0 / p) * std::pow(2.0 * g.I2 / (p - 2.0), (p - 2.0) / p);
}

inline double tau_star(double mu, double p) { return (p - 2.0) / (p + 2.0) * mu; }

inline double nu_star(double mu, double p) {
  return kappa_p(p) * std::pow(mu, -(p - 2.0) / (2.0 * p));
}

/// Closed-form state of the symmetric branch at mu for a given theta.
struct SymmetricBranchPoint {
  double mu;
  double tau_star;
  double nu_star;
  double lambda_theta;
  double j_theta;
};

inline SymmetricBranchPoint symmetric_branch(double mu, const ProblemParams& prm) {
  detail::require(mu > 0.0, "symmetric branch requires mu > 0");
  const double p = prm.p();
  const double th = prm.theta();
  detail::require(2.0 * p * th - (p - 2.0) > 0.0, "theta must exceed (p-2)/(2p)");
  SymmetricBranchPoint pt{};
  pt.mu = mu;
  pt.tau_star = tau_star(mu, p);
  pt.nu_star = nu_star(mu, p);
  pt.lambda_theta = th * mu - (1.0 - th) * pt.tau_star;
  pt.j_theta = std::pow(th, th) * std::pow(mu + pt.tau_star, th) * pt.nu_star;
  return pt;
}

/// mu on the symmetric branch with Lambda*^theta(mu) = Lambda.
inline double symmetric_mu_from_lambda(double theta, double Lambda, double p) {
  const double den = 2.0 * p * theta - (p - 2.0);
  detail::require(den > 0.0, "theta must exceed (p-2)/(2p)");
  return (p + 2.0) * Lambda / den;
}

inline double j_star(double theta, double mu, double p) {
  return kappa_p(p) * std::pow(2.0 * p * theta / (p + 2.0), theta) *
         std::pow(mu, theta - (p - 2.0) / (2.0 * p));
}

/// Optimal constant among symmetric functions, 1 / J*^theta(mu(Lambda)).
inline double k_star_ckn(double theta, double Lambda, double p) {
  detail::require(Lambda > 0.0, "Lambda must be positive");
  return 1.0 / j_star(theta, symmetric_mu_from_lambda(theta, Lambda, p), p);
}

/// d/dmu log J*^theta.
inline double log_j_star_slope(double theta, double mu, double p) {
  return (2.0 * p * theta - (p - 2.0)) / (2.0 * p * mu);
}

/// Lowest eigenvalue of the f_1 linearization at u_{mu,*}.
inline double lambda1(double mu, double p, int d) {
  return d - 1.0 + mu - 0.25 * mu * p * p;
}

struct EtaSymmetric {
  double eta;
  double t_ustar;
};

inline EtaSymmetric eta_symmetric(double Lambda, double p, double theta) {
  detail::require(Lambda > 0.0, "Lambda must be positive");
  const double den = (2.0 * theta - 1.0) * p + 2.0;
  detail::require(den > 0.0, "(2 theta - 1) p + 2 must be positive");
  return {(p + 2.0) * theta / den * Lambda, (p - 2.0) * Lambda / den};
}

/// Zonal harmonics on S^{d-1} in the azimuthal angle, normalized against the
/// probability measure sin^{d-2}(zeta) dzeta / Z_d.
struct HarmonicConstants {
  int d;
  double kappa_d;
  double f1_fourth_moment;
  std::array<double, 4> eigenvalues;
  double z_d;

  /// Gegenbauer-type polynomials g_k(x), k <= 3.
  double g(int k, double x) const {
    switch (k) {
      case 0: return 1.0;
      case 1: return x;
      case 2: return d * x * x - 1.0;
      case 3: return (d + 2.0) * x * x * x - 3.0 * x;
      default: throw domain_error("harmonic index must be in 0..3");
    }
  }

  /// Normalized f_k(zeta) = c_k g_k(cos zeta).
  double f(int k, double zeta) const {
    const double x = std::cos(zeta);
    switch (k) {
      case 0: return 1.0;
      case 1: return std::sqrt(double(d)) * x;
      case 2: return std::sqrt((d + 2.0) / (2.0 * (d - 1.0))) * g(2, x);
      case 3: return std::sqrt(d * (d + 4.0) / (6.0 * (d - 1.0))) * g(3, x);
      default: throw domain_error("harmonic index must be in 0..3");
    }
  }
};

inline HarmonicConstants harmonic_constants(int d) {
  detail::require(d >= 2, "harmonic constants require d >= 2");
  HarmonicConstants h{};
  h.d = d;
  h.kappa_d = std::sqrt(2.0 * (d - 1.0) / (d + 2.0));
  h.f1_fourth_moment = 3.0 * d / (d + 2.0);
  h.eigenvalues = {0.0, d - 1.0, 2.0 * d, 3.0 * (d + 1.0)};
  h.z_d = std::sqrt(pi) * std::exp(std::lgamma(0.5 * (d - 1.0)) - std::lgamma(0.5 * d));
  return h;
}

/// Known bounds on the symmetry threshold for theta = 1 (informational).
struct SymmetryBounds {
  double lower1;
  double lower2;
  double upper;
};

inline SymmetryBounds symmetry_bounds(double p, int d) {
  detail::require(p > 2.0 && p < critical_exponent(d), "symmetry bounds require 2 < p < 2*");
  return {(d - 1.0) * (6.0 - p) / (4.0 * (p - 2.0)), double(d) * d / (p * p), lambda_fs(p, 1.0, d)};
}

}  // namespace ckn
