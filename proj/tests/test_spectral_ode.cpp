#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ckn/spectral_ode.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

double sup_error(const ChiProfile& c, double (*exact)(double, double)) {
  const LineGrid g = c.rescaled_grid();
  double e = 0.0;
  for (int i = 0; i < g.n; ++i) e = std::max(e, std::abs(c.values[i] - exact(g.node(i), c.p)));
  return e;
}

double oddness(const ChiProfile& c) {
  double e = 0.0;
  for (int i = 0; i < c.grid.n; ++i) e = std::max(e, std::abs(c.values[i] - c.values[c.grid.n - 1 - i]));
  return e;
}

}  // namespace

TEST(LineGridTest, Construction) {
  const auto g = make_line_grid(2.0, 5);
  EXPECT_DOUBLE_EQ(g.spacing, 1.0);
  EXPECT_DOUBLE_EQ(g.node(g.center()), 0.0);
  EXPECT_THROW(make_line_grid(1.0, 4), domain_error);
  EXPECT_THROW(make_line_grid(0.0, 5), domain_error);
  EXPECT_THROW(make_line_grid(1.0, 1), domain_error);
}

TEST(Quadrature, Examples) {
  const auto g = make_line_grid(40.0, 4001);
  EXPECT_EQ(quadrature(std::vector<double>(g.n, 0.0), g), 0.0);
  EXPECT_NEAR(quadrature(sample(g, [](double s) { return std::pow(oracle::sech(s), 2); }), g), 2.0,
              1e-10);
  EXPECT_NEAR(quadrature(sample(g, [](double s) { return std::pow(oracle::sech(s), 2.0); }), g),
              gamma_integrals(4.0).I2, 1e-8);
  EXPECT_THROW(quadrature(std::vector<double>(3, 1.0), g), domain_error);
  // exact on cubics over a short interval
  const auto h = make_line_grid(1.0, 5);
  EXPECT_NEAR(quadrature(sample(h, [](double s) { return s * s * s + 2 * s * s + 1; }), h),
              4.0 / 3.0 + 2.0, 1e-14);
}

TEST(PoschlTeller, Values) {
  EXPECT_NEAR(pt_ground_energy(2.0), -1.0, 1e-15);
  EXPECT_NEAR(pt_depth(2.8), 15.75, 1e-12);
  EXPECT_NEAR(pt_ground_energy(15.75), -12.25, 1e-12);
  EXPECT_THROW(pt_ground_energy(0.0), domain_error);
  for (double p : {2.3, 2.8, 3.5, 5.0})
    EXPECT_NEAR(pt_ground_energy(pt_depth(p)), -p * p / ((p - 2) * (p - 2)), 1e-10 * p * p / ((p - 2) * (p - 2)));
}

TEST(PoschlTeller, DenseEigenOracle) {
  for (double U0 : {2.0, 6.0, 15.75}) {
    const auto g = make_line_grid(15.0, 1201);
    const int m = g.n - 2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    const double h = g.spacing;
    for (int k = 0; k < m; ++k) {
      const double s = g.node(k + 1);
      A(k, k) = 2.0 / (h * h) - U0 * std::pow(oracle::sech(s), 2);
      if (k > 0) A(k, k - 1) = -1.0 / (h * h);
      if (k < m - 1) A(k, k + 1) = -1.0 / (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    EXPECT_NEAR(es.eigenvalues()(0), pt_ground_energy(U0), 1e-4 * std::abs(pt_ground_energy(U0)));
  }
}

TEST(Sigma, Values) {
  EXPECT_NEAR(sigma(2.8, 5), 9.0, 1e-9);
  for (int d = 3; d <= 10; ++d)
    for (double p = 2.02; p < critical_exponent(d); p += 0.05) EXPECT_GT(sigma(p, d), 1.0) << p << " " << d;
}

TEST(Chi, ClosedFormsAtDefaultGrid) {
  for (double p : {2.5, 2.8, 3.2}) {
    const auto g = default_chi_grid(p, 5);
    const auto c1 = solve_chi(ChiKind::chi_0_pm1, p, 5, g);
    const auto c2 = solve_chi(ChiKind::chi_0_2pm3, p, 5, g);
    EXPECT_LT(sup_error(c1, chi_0_pm1_exact), 1e-6) << p;
    EXPECT_LT(sup_error(c2, chi_0_2pm3_exact), 1e-6) << p;
    EXPECT_LT(c1.residual_norm, 1e-8);
    EXPECT_LT(c2.residual_norm, 1e-8);
  }
  const auto c = solve_chi(ChiKind::chi_0_2pm3, 4.0, 3, default_chi_grid(3.9, 3));
  EXPECT_NEAR(c.values[c.grid.center()], -1.0 / 6.0, 1e-6);
}

TEST(Chi, EvenAndDecaying) {
  for (auto kind : {ChiKind::chi_0_pm1, ChiKind::chi_0_2pm3, ChiKind::chi_2_2pm3}) {
    const auto c = solve_chi(kind, 2.8, 5, default_chi_grid(2.8, 5));
    double mx = 0.0;
    for (double v : c.values) mx = std::max(mx, std::abs(v));
    EXPECT_LT(oddness(c), 1e-8);
    EXPECT_LT(std::abs(c.values[1]), 1e-6 * mx);
    EXPECT_LT(std::abs(c.values[c.grid.n - 2]), 1e-6 * mx);
  }
}

TEST(Chi, FourthOrderConvergence) {
  const double p = 2.8;
  const auto base = default_chi_grid(p, 5);
  double prev = 0.0;
  for (int n : {201, 401, 801}) {
    const auto c = solve_chi(ChiKind::chi_0_pm1, p, 5, make_line_grid(base.half_width, n));
    const double e = sup_error(c, chi_0_pm1_exact);
    if (prev > 0.0) EXPECT_NEAR(prev / e, 16.0, 16.0 * 0.3) << n;
    prev = e;
  }
}

TEST(Chi, Moments) {
  for (double p : {2.4, 2.8, 3.2}) {
    const auto g = default_chi_grid(p, 5);
    const auto c2 = solve_chi(ChiKind::chi_0_2pm3, p, 5, g);
    const auto gi = gamma_integrals(p);
    // int chi_{0,2p-3} w = b_{0,1}; closed form via I2 and Ip
    const double b01 = -(p - 2) / (4 * (p - 1)) * (2 * gi.I2 - gi.Ip);
    EXPECT_NEAR(c2.moment(1.0), b01, 1e-7 * std::abs(b01));
    const double b0pm1 = -(p - 2) / (3 * p - 2) * gi.Ip;
    EXPECT_NEAR(c2.moment(p - 1.0), b0pm1, 1e-7 * std::abs(b0pm1));
  }
}

TEST(Chi, Errors) {
  EXPECT_THROW(solve_chi(ChiKind::chi_0_pm1, 3.5, 5, make_line_grid(10, 101)), domain_error);
  EXPECT_THROW(solve_chi(ChiKind::chi_0_pm1, 2.0, 5, make_line_grid(10, 101)), domain_error);
  EXPECT_EQ(chi_kind_from_string("chi_2_2pm3"), ChiKind::chi_2_2pm3);
  EXPECT_THROW(chi_kind_from_string("chi_9"), domain_error);
}

TEST(Chi, Interpolation) {
  const auto c = solve_chi(ChiKind::chi_0_pm1, 2.8, 5, default_chi_grid(2.8, 5));
  for (double sig = -7.3; sig < 7.3; sig += 0.37)
    EXPECT_NEAR(c.at_rescaled(sig), chi_0_pm1_exact(sig, 2.8), 1e-7);
  EXPECT_EQ(c.at_rescaled(1e3), 0.0);
}
