#include <gtest/gtest.h>

#include <Eigen/Sparse>
#include <cmath>

#include "ckn/expansion.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

double u_line(double s, double mu, double p) {
  const auto u = symmetric_extremal(mu, p);
  return u.alpha * std::pow(oracle::sech(u.beta * s), 2.0 / (p - 2.0));
}

// Second-order finite differences with a sparse LU on the full line, then
// the trapezoid rule: independent of the Numerov/Simpson pipeline.
double b22_oracle(double p, int d, int n) {
  const double m = mu_fs(p, d);
  const double L = 30.0, h = 2 * L / (n - 1);
  const double shift = 4.0 * (m + 2.0 * d) / (m * (p - 2) * (p - 2));
  const double depth = 2.0 * p * (p - 1) / ((p - 2) * (p - 2));
  const int k = n - 2;
  Eigen::SparseMatrix<double> A(k, k);
  Eigen::VectorXd f(k);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < k; ++i) {
    const double x = -L + (i + 1) * h;
    const double se = oracle::sech(x);
    t.emplace_back(i, i, 2.0 / (h * h) + shift - depth * se * se);
    if (i > 0) t.emplace_back(i, i - 1, -1.0 / (h * h));
    if (i < k - 1) t.emplace_back(i, i + 1, -1.0 / (h * h));
    f(i) = std::pow(se, 2.0 * (2 * p - 3) / (p - 2));
  }
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Eigen::VectorXd x = lu.solve(f);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += h * x(i) * f(i);
  return acc;
}

}  // namespace

TEST(Expansion, QuarticCoefficientRoutesAgree) {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = gen.integer(3, 10);
    const double p = gen.uniform(2.05, critical_exponent(d) - 0.05);
    const double m = mu_fs(p, d);
    const double den = oracle::line_even([&](double s) { return std::pow(u_line(s, m, p), p); });
    const double a0 =
        oracle::line_even([&](double s) { return std::pow(u_line(s, m, p), 2 * p - 2); }) / den;
    const double r4 =
        oracle::line_even([&](double s) { return std::pow(u_line(s, m, p), 3 * p - 4); }) / den;
    EXPECT_NEAR(a0, a0_ratio(m, p), 1e-9 * a0);
    EXPECT_NEAR(r4, r4_ratio(m, p), 1e-9 * r4);
    const double b = b_at_mu_fs(p, d);
    EXPECT_NEAR(b_from_ratios(p, d, a0, r4), b, 1e-6 * std::abs(b)) << p << " " << d;
  }
  EXPECT_NEAR(b_at_mu_fs(2.8, 5), 18.260156, 1e-5);
}

TEST(Expansion, SecondOrderMomentsMatchClosedForms) {
  for (auto [p, d] : {std::pair{2.4, 4}, {2.8, 5}, {3.2, 5}, {2.6, 8}}) {
    const auto r = compute_expansion(p, d);
    EXPECT_NEAR(r.b01, b01_over_i2(p) * r.I2, 1e-7 * std::abs(r.b01));
    EXPECT_NEAR(r.b0pm1, b0pm1_over_ip(p) * r.Ip, 1e-7 * std::abs(r.b0pm1));
    EXPECT_NEAR(r.b02pm3, b02pm3_over_ip(p) * r.Ip, 1e-7 * std::abs(r.b02pm3));
    // b_{0,p-1} also equals int chi_{0,p-1} w^{2p-3} (symmetry of the Green function)
    const auto c1 = solve_chi(ChiKind::chi_0_pm1, p, d, default_chi_grid(p, d));
    EXPECT_NEAR(-c1.moment(2 * p - 3), r.b0pm1, 1e-7 * std::abs(r.b0pm1));
  }
}

TEST(Expansion, B22AgainstIndependentSolver) {
  for (auto [p, d] : {std::pair{2.8, 5}, {2.5, 3}, {3.1, 5}}) {
    const auto r = compute_expansion(p, d);
    const double o1 = b22_oracle(p, d, 12001), o2 = b22_oracle(p, d, 24001);
    const double o = o2 + (o2 - o1) / 3.0;
    EXPECT_NEAR(r.b22pm3, o, 1e-6 * o) << p << " " << d;
    EXPECT_GT(r.b22pm3, 0.0);
    EXPECT_LE(r.b22pm3, r.b22pm3_bound);
  }
}

TEST(Expansion, B22BoundProperty) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = gen.integer(3, 9);
    const double p = gen.uniform(2.1, critical_exponent(d) - 0.05);
    ExpansionOptions o;
    o.richardson = false;
    const auto r = compute_expansion(p, d, o);
    EXPECT_GT(r.b22pm3, 0.0) << p << " " << d;
    EXPECT_LE(r.b22pm3, r.b22pm3_bound) << p << " " << d;
    EXPECT_LE(r.L_psi, r.L_psi_approx);
    if (r.c_pd && r.c_pd_approx && r.L_psi_approx <= 2 * r.b_mu_fs) EXPECT_LE(*r.c_pd, *r.c_pd_approx);
  }
}

TEST(Expansion, LPsiFromIntegralDefinition) {
  for (auto [p, d] : {std::pair{2.8, 5}, {3.0, 4}}) {
    const double m = mu_fs(p, d);
    const auto r = compute_expansion(p, d);
    const auto g = default_chi_grid(p, d);
    const auto a = build_ansatz(m, p, d, 1.0, g);
    EXPECT_NEAR(l_psi_from_profiles(a, g), r.L_psi, 1e-6 * r.L_psi);
    // psi~ minimizes Q - L/2 with value L/2 at the optimum: 2 q[psi~] = L
    EXPECT_NEAR(two_q_from_profiles(a, g), r.L_psi, 1e-5 * r.L_psi);
  }
}

TEST(Expansion, ReferenceValuesAtDimensionFive) {
  const auto r = compute_expansion(2.8, 5);
  ASSERT_TRUE(r.hypothesis_H);
  ASSERT_TRUE(r.c_pd && r.tau_prime && r.theta2);
  EXPECT_NEAR(*r.c_pd, 0.11581, 1e-4);
  EXPECT_NEAR(*r.tau_prime, 2.7938, 1e-3);
  EXPECT_NEAR(*r.theta2, 0.73641, 1e-4);
  EXPECT_NEAR(r.sigma, 9.0, 1e-9);
  const auto j = to_json(r);
  for (const char* k : {"p", "d", "b_mu_fs", "b01", "b0pm1", "b02pm3", "b22pm3", "a0", "sigma",
                        "L_psi", "L_psi_approx", "c_pd", "c_pd_approx", "hypothesis_H", "k_psi",
                        "tau_prime", "nu_prime_ratio", "theta2"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Expansion, TauPrimeReducedForm) {
  for (auto [p, d] : {std::pair{2.8, 5}, {2.5, 7}}) {
    const double c = 0.3;
    const double reduced =
        (p - 2) / (p + 2) + 16 * p * p * (d - 1.0) * (d - 1.0) * c / ((p - 2) * std::pow(p + 2, 3));
    EXPECT_NEAR(tau_prime_fs(p, d, c), reduced, 1e-12 * reduced);
  }
  EXPECT_THROW(tau_prime_fs(2.8, 5, -0.1), domain_error);
  EXPECT_THROW(theta2_from_tau_prime(-0.5), domain_error);
}

TEST(Expansion, IdentityResidualWithNumericMoment) {
  for (auto [p, d] : {std::pair{2.8, 5}, {2.5, 4}, {3.1, 5}}) {
    const auto r = compute_expansion(p, d);
    ASSERT_TRUE(r.c_pd);
    EXPECT_LT(rem2_identity_residual(p, d, *r.c_pd, r.b01 / r.I2), 1e-6) << p << " " << d;
  }
}

TEST(Expansion, PApproxRoot) {
  const double pa = p_approx(5);
  EXPECT_NEAR(pa, 3.2323, 2e-3);
  // the quartic root is the zero of b - L_approx/2
  auto margin = [](double p) { return b_at_mu_fs(p, 5) - 0.5 * l_psi_approx(p, 5); };
  EXPECT_LT(std::abs(margin(pa)), 1e-8 * b_at_mu_fs(pa, 5));
  EXPECT_GT(margin(pa - 0.01), 0.0);
  EXPECT_LT(margin(pa + 0.01), 0.0);
  for (int d = 3; d <= 12; ++d) {
    const double q = p_approx(d);
    EXPECT_GT(q, 2.0);
    EXPECT_LT(q, critical_exponent(d));
  }
}

TEST(Expansion, CoefficientPositiveBelowThreshold) {
  for (double p = 2.05; p < 3.33; p += 0.04) {
    ExpansionOptions o;
    o.richardson = false;
    const auto r = compute_expansion(p, 5, o);
    ASSERT_TRUE(r.c_pd) << p;
    EXPECT_GT(*r.c_pd, 0.0) << p;
  }
}

TEST(Expansion, HypothesisFailureIsReported) {
  const auto cr = c_from(2.8, 5.0, 10.0);
  EXPECT_FALSE(cr.hypothesis_H);
  EXPECT_TRUE(c_from(2.8, 5.0, 9.0).hypothesis_H);
}

TEST(Expansion, XiDecreasingAndSignAtOne) {
  const auto r = compute_expansion(2.8, 5);
  const double c = *r.c_pd, t2 = *r.theta2;
  double prev = 1e300;
  for (double th = vartheta(2.8, 5) + 0.01; th <= 1.0; th += 0.01) {
    const double x = xi_theta(th, 2.8, 5, c, t2);
    EXPECT_LT(x, prev);
    prev = x;
  }
  EXPECT_NEAR(xi_theta(1.0, 2.8, 5, c, t2), -0.25 * (2.8 * 2.8 - 4) * c, 1e-14);
}

TEST(Expansion, SlopeSignsAroundTheta2) {
  for (auto [p, d] : {std::pair{2.8, 5}, {2.6, 5}, {2.5, 3}}) {
    const auto r = compute_expansion(p, d);
    if (!r.theta2) continue;
    const double t2 = *r.theta2, tp = *r.tau_prime;
    EXPECT_NEAR(lambda_theta_slope_fs(t2, tp), 0.0, 1e-12);
    for (double dt : {0.01, 0.05})
      if (t2 - dt > vartheta(p, d)) EXPECT_LT(lambda_theta_slope_fs(t2 - dt, tp), 0.0);
    for (double dt : {0.01, 0.05})
      if (t2 + dt <= 1.0) EXPECT_GT(lambda_theta_slope_fs(t2 + dt, tp), 0.0);
  }
}

TEST(Ansatz, StructureAndConstraints) {
  const double p = 2.8;
  const int d = 5;
  const double m = mu_fs(p, d);
  const auto a = build_ansatz(1.05 * m, p, d);
  EXPECT_NEAR(a.B2 / a.B0, harmonic_constants(d).kappa_d, 1e-14);
  EXPECT_GT(a.eps, 0.0);
  for (double s : {0.0, 0.3, 1.1}) {
    const double ip = oracle::sphere([&](double z) { return a.phi(s, z) * a.psi(s, z); }, d);
    EXPECT_LT(std::abs(ip), 1e-10);
  }
  EXPECT_THROW(build_ansatz(0.9 * m, p, d), domain_error);
  EXPECT_THROW(build_ansatz(1.1 * m, p, d, -1.0, default_chi_grid(p, d)), domain_error);
  EXPECT_DOUBLE_EQ(energy_ratio_prediction(m, p, d, 0.2), 1.0);
  EXPECT_LT(energy_ratio_prediction(1.1 * m, p, d, 0.2), 1.0);
}

TEST(Ansatz, FirstHarmonicCorrectionVanishes) {
  const auto diag = psi1_diagnostic(2.8, 5, default_chi_grid(2.8, 5));
  EXPECT_LT(std::abs(diag.forcing_moment), 1e-12);
  EXPECT_LT(diag.max_abs_psi1, 1e-10);
}

TEST(Expansion, Rejections) {
  EXPECT_THROW(compute_expansion(3.4, 5), domain_error);
  EXPECT_THROW(compute_expansion(2.5, 2), domain_error);
  EXPECT_THROW(p_approx(2), domain_error);
}
