#include <gtest/gtest.h>

#include <cmath>

#include "ckn/continuation.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

constexpr double kP = 2.8;
constexpr int kD = 5;

CylinderGrid grid_at(double mu, int n_s = 801, int n_zeta = 32) {
  const double beta = 0.5 * (kP - 2.0) * std::sqrt(mu);
  return make_cylinder_grid(20.0 / beta, n_s, n_zeta, kD);
}

// closed-form Q_mu[u_{mu,*}] = nu*(mu + tau*)
double q_star(double mu) { return nu_star(mu, kP) * (mu + tau_star(mu, kP)); }

CylinderField perturbed_symmetric(const CylinderGrid& g, const AngularBasis& b, double mu, double eps) {
  const auto u = symmetric_extremal(mu, kP);
  const auto h = harmonic_constants(kD);
  return sample_field(g, b, [&](double s, double z) { return u(s) * (1.0 + eps * h.f(1, z)); });
}

}  // namespace

TEST(AngularBasis, QuadratureAndOrthonormality) {
  for (int d : {3, 5, 6}) {
    const auto b = make_angular_basis(d, 24);
    EXPECT_NEAR(b.weight.sum(), 1.0, 1e-14);
    const Eigen::MatrixXd G = b.V.transpose() * b.weight.asDiagonal() * b.V;
    EXPECT_LT((G - Eigen::MatrixXd::Identity(24, 24)).cwiseAbs().maxCoeff(), 1e-11);
    // moments of cos(zeta) against the independent sphere quadrature
    for (int k : {2, 4, 10}) {
      double q = 0.0;
      for (int j = 0; j < b.n; ++j) q += b.weight(j) * std::pow(b.x(j), k);
      EXPECT_NEAR(q, oracle::sphere([k](double t) { return std::pow(std::cos(t), k); }, d), 1e-12);
    }
  }
}

TEST(AngularBasis, LaplaceBeltramiOnHarmonics) {
  const auto b = make_angular_basis(kD, 32);
  const auto h = harmonic_constants(kD);
  for (int k = 0; k <= 3; ++k) {
    Eigen::RowVectorXd f(b.n);
    for (int j = 0; j < b.n; ++j) f(j) = h.f(k, b.zeta(j));
    const Eigen::RowVectorXd Af = f * b.A.transpose();
    EXPECT_LT((Af - h.eigenvalues[k] * f).cwiseAbs().maxCoeff(), 1e-12 * b.eig.maxCoeff()) << k;
  }
}

TEST(Cylinder, GridValidation) {
  EXPECT_THROW(make_cylinder_grid(10.0, 800, 32, 5), domain_error);
  EXPECT_THROW(make_cylinder_grid(10.0, 803, 32, 5), domain_error);
  EXPECT_THROW(make_cylinder_grid(-1.0, 801, 32, 5), domain_error);
  EXPECT_NO_THROW(make_cylinder_grid(10.0, 801, 32, 5));
  EXPECT_EQ(default_n_zeta(1.0, 2.8, 5), 32);
  EXPECT_EQ(default_n_zeta(100.0, 2.8, 5) % 2, 0);
  // finer in zeta where the branch concentrates more (larger vartheta)
  EXPECT_GT(default_n_zeta(50.0, 3.15, 5), default_n_zeta(50.0, 2.8, 5));
}

TEST(Cylinder, QEnergyOfSymmetricExtremal) {
  for (double mu : {2.0, 6.25}) {
    const auto g = grid_at(mu);
    const auto b = make_angular_basis(kD, 32);
    const auto u = symmetric_field(g, b, mu, kP);
    const auto I = field_integrals(u, b, kP);
    // fourth-order s differences: (beta h)^4 ~ 6e-6 on the default grid
    EXPECT_NEAR(q_energy(I, mu, kP) / q_star(mu), 1.0, 5e-6);
    // Q = ||u||_p^{p-2} at the exact solution
    EXPECT_NEAR(q_energy(I, mu, kP), std::pow(I.massp, (kP - 2.0) / kP), 5e-6 * q_star(mu));
    EXPECT_NEAR(I.nonradial, 0.0, 1e-20);
  }
}

TEST(Cylinder, QEnergyScaleInvariantAndRejectsZero) {
  const double mu = 5.0;
  const auto g = grid_at(mu);
  const auto b = make_angular_basis(kD, 32);
  auto u = perturbed_symmetric(g, b, mu, 0.3);
  const double q1 = q_energy(u, b, mu, kP);
  u.values *= 2.0;
  EXPECT_NEAR(q_energy(u, b, mu, kP), q1, 1e-12 * q1);
  u.values.setZero();
  EXPECT_THROW(q_energy(u, b, mu, kP), domain_error);
}

TEST(Cylinder, ResampleSmoothField) {
  const double mu = 5.0;
  const auto g1 = grid_at(mu, 401, 24);
  const auto g2 = grid_at(mu, 801, 40);
  const auto b1 = make_angular_basis(kD, 24), b2 = make_angular_basis(kD, 40);
  const auto u1 = perturbed_symmetric(g1, b1, mu, 0.4);
  const auto u2 = perturbed_symmetric(g2, b2, mu, 0.4);
  const auto r = resample(u1, b1, g2, b2);
  EXPECT_LT((r.values - u2.values).cwiseAbs().maxCoeff(), 2e-4 * u2.values.maxCoeff());
  const auto same = resample(u1, b1, g1, b1);
  EXPECT_LT((same.values - u1.values).cwiseAbs().maxCoeff(), 1e-12 * u1.values.maxCoeff());
}

TEST(Solver, SymmetricSeedGivesSymmetricSolution) {
  for (double mu : {2.0, 6.25}) {
    const auto g = grid_at(mu);
    const auto b = make_angular_basis(kD, 32);
    const auto bp = solve_el(mu, kP, kD, symmetric_field(g, b, mu, kP), b);
    EXPECT_TRUE(bp.symmetric);
    EXPECT_LT(bp.residual_norm, 1e-9);
    EXPECT_NEAR(bp.tau, tau_star(mu, kP), 1e-5);
    EXPECT_NEAR(bp.q, q_energy(bp.field, b, mu, kP), 1e-12 * bp.q);
    EXPECT_GE(bp.field.values.minCoeff(), 0.0);
  }
}

TEST(Solver, DiscreteEnergyConvergesAtFourthOrder) {
  const double mu = 3.0;
  const auto b = make_angular_basis(kD, 32);
  std::vector<double> err;
  for (int n : {201, 401, 801}) {
    const auto g = grid_at(mu, n);
    const auto bp = solve_el(mu, kP, kD, symmetric_field(g, b, mu, kP), b);
    err.push_back(std::abs(bp.q / q_star(mu) - 1.0));
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  EXPECT_GT(o1, 3.5);
  EXPECT_GT(o2, 3.5);
  EXPECT_LT(o2, 4.5);
}

TEST(Solver, BelowThresholdPerturbationDecays) {
  const double mu = 0.9 * mu_fs(kP, kD);
  const auto g = grid_at(mu);
  const auto b = make_angular_basis(kD, 32);
  const auto bp = solve_el(mu, kP, kD, perturbed_symmetric(g, b, mu, 0.05), b);
  EXPECT_TRUE(bp.symmetric);
  EXPECT_NEAR(bp.tau, tau_star(mu, kP), 1e-5);
}

TEST(Solver, AboveThresholdFindsLowerEnergy) {
  const double mu = 1.5 * mu_fs(kP, kD);
  const auto g = grid_at(mu);
  const auto b = make_angular_basis(kD, 32);
  SolveOptions opt;
  opt.descent_first = true;
  const auto bp = solve_el(mu, kP, kD, perturbed_symmetric(g, b, mu, 0.05), b, opt);
  EXPECT_FALSE(bp.symmetric);
  EXPECT_GT(bp.f1_amplitude, 0.1);
  EXPECT_LT(bp.residual_norm, 1e-9);
  EXPECT_LT(bp.q, q_star(mu) * (1.0 - 1e-3));
  // descent is monotone in the quotient
  const auto& e = bp.stats.descent_energy;
  ASSERT_GT(e.size(), 2u);
  for (size_t i = 1; i < e.size(); ++i) EXPECT_LE(e[i], e[i - 1] * (1.0 + 1e-13)) << i;
}

TEST(Solver, Rejections) {
  const auto g = grid_at(3.0);
  const auto b = make_angular_basis(kD, 32);
  auto u = symmetric_field(g, b, 3.0, kP);
  EXPECT_THROW(solve_el(-1.0, kP, kD, u, b), domain_error);
  EXPECT_THROW(solve_el(3.0, 3.5, kD, u, b), domain_error);
  EXPECT_THROW(solve_el(3.0, kP, kD, u, make_angular_basis(kD, 30)), domain_error);
  u.values.setZero();
  EXPECT_THROW(solve_el(3.0, kP, kD, u, b), domain_error);
}

TEST(Solver, ZeroSolutionDetected) {
  // a scaled-down extremal lies in the basin of u = 0 for Newton
  const auto g = grid_at(3.0);
  const auto b = make_angular_basis(kD, 32);
  auto u = symmetric_field(g, b, 3.0, kP);
  u.values *= 1e-2;
  try {
    solve_el(3.0, kP, kD, u, b);
    FAIL() << "expected a solver error";
  } catch (const solver_error& e) {
    EXPECT_NE(std::string(e.what()).find("zero solution"), std::string::npos);
  }
  // the descent is scale invariant and recovers u_{mu,*}
  SolveOptions opt;
  opt.descent_first = true;
  EXPECT_NEAR(solve_el(3.0, kP, kD, u, b, opt).tau, tau_star(3.0, kP), 1e-5);
}

class BranchTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const double m = mu_fs(kP, kD);
    StepPolicy pol;
    pol.step = 0.15;
    pol.geometric = true;
    pol.first_offset = 0.01 * m;
    branch_ = new Branch(continue_branch(0.9 * m, 2.0 * m, pol, kP, kD));
    expansion_ = new ExpansionReport(compute_expansion(kP, kD));
  }
  static void TearDownTestSuite() {
    delete branch_;
    delete expansion_;
  }
  static Branch* branch_;
  static ExpansionReport* expansion_;
};
Branch* BranchTest::branch_ = nullptr;
ExpansionReport* BranchTest::expansion_ = nullptr;

TEST_F(BranchTest, OrderedAndComplete) {
  const auto& br = *branch_;
  EXPECT_FALSE(br.truncated) << br.diagnostic;
  ASSERT_GT(br.points.size(), 6u);
  for (size_t i = 1; i < br.points.size(); ++i) EXPECT_GT(br.points[i].mu, br.points[i - 1].mu);
  EXPECT_NEAR(br.points.back().mu, 2.0 * mu_fs(kP, kD), 1e-12);
  for (const auto& q : br.points) {
    EXPECT_EQ(q.symmetric, q.mu <= mu_fs(kP, kD));
    EXPECT_GE(q.field.values.minCoeff(), 0.0);
    if (q.symmetric) EXPECT_LT(q.f1_amplitude, 1e-8);
  }
}

TEST_F(BranchTest, BifurcationLocated) {
  const auto& br = *branch_;
  const double m = mu_fs(kP, kD);
  EXPECT_NEAR(br.mu_bifurcation_estimate, m, 1e-3 * m);
  for (const auto& q : br.points)
    if (!q.symmetric) {
      EXPECT_GT(q.mu, br.mu_bifurcation_estimate);
      break;
    }
}

TEST_F(BranchTest, TauSlopeMatchesExpansion) {
  // one-sided slope from the first two non-symmetric points, extrapolated
  std::vector<const BranchPoint*> ns;
  for (const auto& q : branch_->points)
    if (!q.symmetric) ns.push_back(&q);
  ASSERT_GE(ns.size(), 3u);
  const double s1 = (ns[1]->tau - ns[0]->tau) / (ns[1]->mu - ns[0]->mu);
  const double s2 = (ns[2]->tau - ns[1]->tau) / (ns[2]->mu - ns[1]->mu);
  const double m1 = 0.5 * (ns[0]->mu + ns[1]->mu), m2 = 0.5 * (ns[1]->mu + ns[2]->mu);
  const double slope = s1 + (mu_fs(kP, kD) - m1) * (s2 - s1) / (m2 - m1);
  EXPECT_NEAR(slope, *expansion_->tau_prime, 0.05 * *expansion_->tau_prime);
}

TEST_F(BranchTest, EnergyMatchesExpansionToSecondOrder) {
  const double m = mu_fs(kP, kD);
  std::vector<double> scaled;
  for (const auto& q : branch_->points) {
    if (q.symmetric || q.mu > 1.2 * m) continue;
    const double dmu = q.mu - m;
    const double pred = energy_ratio_prediction(q.mu, kP, kD, *expansion_->c_pd);
    scaled.push_back(std::abs(q.q / q_star(q.mu) - pred) / (dmu * dmu));
  }
  ASSERT_GE(scaled.size(), 3u);
  // the quadratic coefficient itself is (p^2-4) c / 8 ~ 0.056
  EXPECT_LT(scaled.front(), 0.01);
  EXPECT_LT(scaled[0], scaled[2]);
}

TEST_F(BranchTest, JIncreasingAndConcaveForThetaOne) {
  const auto c = reparametrize(*branch_, 1.0);
  for (size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i].J, c[i - 1].J);
  for (size_t i = 2; i < c.size(); ++i) {
    const double s1 = (c[i - 1].J - c[i - 2].J) / (c[i - 1].Lambda - c[i - 2].Lambda);
    const double s2 = (c[i].J - c[i - 1].J) / (c[i].Lambda - c[i - 1].Lambda);
    EXPECT_LT(s2, s1 * (1.0 + 1e-9)) << c[i].mu;
  }
}

TEST_F(BranchTest, ReparametrizationDefinitions) {
  const auto c1 = reparametrize(*branch_, 1.0);
  for (size_t i = 0; i < c1.size(); ++i) {
    const auto& q = branch_->points[i];
    EXPECT_DOUBLE_EQ(c1[i].Lambda, q.mu);
    EXPECT_DOUBLE_EQ(c1[i].J, q.nu * (q.mu + q.tau));
  }
  const double th = 0.8;
  const auto c = reparametrize(*branch_, th);
  std::vector<double> mus;
  for (const auto& q : branch_->points) mus.push_back(q.mu);
  const auto sym = symmetric_curve(mus, kP, kD, th);
  for (size_t i = 0; i < c.size(); ++i) {
    if (!c[i].symmetric) continue;
    EXPECT_NEAR(c[i].Lambda, sym[i].Lambda, 1e-5);
    EXPECT_NEAR(c[i].J / sym[i].J, 1.0, 1e-5);
  }
  EXPECT_THROW(reparametrize(*branch_, 0.7), domain_error);
}

TEST_F(BranchTest, TheoremT2SignsOnSolverBranch) {
  const double th2 = *expansion_->theta2;
  for (double th : {0.72, 0.73, 0.8, 1.0}) {
    const auto c = reparametrize(*branch_, th);
    const auto off = branch_offset(*branch_, th);
    size_t k = 0;
    while (c[k].symmetric) ++k;
    // finite-difference slope of Lambda^theta right above mu_FS
    const double slope = (c[k + 1].Lambda - c[k].Lambda) / (c[k + 1].mu - c[k].mu);
    if (th < th2) {
      EXPECT_LT(slope, 0.0) << th;
      EXPECT_GT(off[k + 1], 0.0) << th;
    } else {
      EXPECT_GT(slope, 0.0) << th;
      EXPECT_LT(off[k + 1], 0.0) << th;
    }
    // the branch position agrees with the sign of xi^theta at mu_FS
    const double xi = xi_theta(th, kP, kD, *expansion_->c_pd, th2);
    EXPECT_EQ(off[k + 1] > 0.0, xi > 0.0) << th;
  }
}

TEST_F(BranchTest, TangencyAtBifurcation) {
  for (double th : {vartheta(kP, kD), 0.8, 1.0}) {
    const double delta = tangency_check(*branch_, th);
    const auto c = reparametrize(*branch_, th);
    // compared with the slope of the symmetric curve itself
    const double a = (2.0 * kP * th - (kP - 2.0)) / (kP + 2.0);
    const double m = mu_fs(kP, kD);
    const double sym = j_star(th, m, kP) * (th - (kP - 2.0) / (2.0 * kP)) / m / a;
    EXPECT_LT(std::abs(delta), 2e-3 * std::abs(sym)) << th;
  }
  Branch tiny;
  tiny.p = kP;
  tiny.d = kD;
  tiny.points.push_back(branch_->points.front());
  EXPECT_THROW(tangency_check(tiny, 1.0), domain_error);
}

TEST(Continuation, TangencyImprovesUnderStepRefinement) {
  const double m = mu_fs(kP, kD);
  auto run = [&](double off) {
    StepPolicy pol;
    pol.step = 4.0 * off / m;
    pol.geometric = true;
    pol.first_offset = off;
    return std::abs(tangency_check(continue_branch(0.99 * m, m * (1.0 + 10.0 * off / m), pol, kP, kD), 1.0));
  };
  EXPECT_LT(run(0.02 * m), run(0.04 * m));
}

TEST(Continuation, Rejections) {
  const double m = mu_fs(kP, kD);
  EXPECT_THROW(continue_branch(2.0, 1.0, {}, kP, kD), domain_error);
  EXPECT_THROW(continue_branch(0.1 * m, m, {}, kP, kD), domain_error);
  StepPolicy bad;
  bad.step = 0.0;
  EXPECT_THROW(continue_branch(m, 2 * m, bad, kP, kD), domain_error);
}
