#pragma once

// Solutions of -u_ss - Delta_S u + mu u = u^{p-1} on the cylinder and their
// continuation in mu along the branch bifurcating at mu_FS.
//
// Discretization: Numerov in s on the even half line (reflection at s = 0
// also fixes the translation invariance: the maximum sits at s = 0), and the
// spectral zonal basis in zeta. The discrete residual at row i is
//   F_i = U_{i+1} - 2 U_i + U_{i-1} - h^2/12 (G_{i+1} + 10 G_i + G_{i-1}),
//   G   = A U + mu U - |U|^{p-2} U.

#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ckn/analytic.hpp"
#include "ckn/cylinder.hpp"
#include "ckn/error.hpp"
#include "ckn/expansion.hpp"

extern "C" void dgbtf2_(const int* m, const int* n, const int* kl, const int* ku, double* ab,
                        const int* ldab, int* ipiv, int* info);

namespace ckn {

struct SolveOptions {
  double tol = 1e-9;          // relative Numerov residual
  int max_newton = 40;
  bool descent_first = false;  // run the monotone descent before Newton
  int max_descent = 4000;
  double descent_tol = 1e-13;  // relative change of the descent quotient
};

struct SolveStats {
  int newton_iterations = 0;
  int descent_iterations = 0;
  int clipped = 0;  // negative values set to zero between iterations
  std::vector<double> descent_energy;  // quotient per descent iteration
};

struct BranchPoint {
  double mu = 0.0;
  CylinderField field;
  double tau = 0.0;
  double nu = 0.0;
  double q = 0.0;  // Q_mu[u] = nu (mu + tau)
  double residual_norm = 0.0;
  bool symmetric = true;
  double f1_amplitude = 0.0;  // ||f_1 component||_2 / ||u||_2
  SolveStats stats;
};

namespace detail {

inline Eigen::MatrixXd numerov_residual(const Eigen::MatrixXd& U, const AngularBasis& b, double mu,
                                        double p, double h) {
  const int M = static_cast<int>(U.rows()) - 1;
  const int n = static_cast<int>(U.cols());
  Eigen::MatrixXd G = U * b.A.transpose() + mu * U;
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j < n; ++j) G(i, j) -= std::pow(std::abs(U(i, j)), p - 2.0) * U(i, j);
  const double c = h * h / 12.0;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(M + 1, n);
  F.row(0) = 2.0 * U.row(1) - 2.0 * U.row(0) - c * (2.0 * G.row(1) + 10.0 * G.row(0));
  for (int i = 1; i < M; ++i)
    F.row(i) = U.row(i + 1) - 2.0 * U.row(i) + U.row(i - 1) -
               c * (G.row(i + 1) + 10.0 * G.row(i) + G.row(i - 1));
  return F;
}

/// Residual scale h^2 max(mu |U|, |U|^{p-1}).
inline double residual_scale(const Eigen::MatrixXd& U, double mu, double p, double h) {
  const double m = U.cwiseAbs().maxCoeff();
  return h * h * std::max(mu * m, std::pow(m, p - 1.0));
}

/// Newton step: solve J dx = -F with a banded LU (unknown index i*n + j).
inline Eigen::MatrixXd newton_direction(const Eigen::MatrixXd& U, const Eigen::MatrixXd& F,
                                        const AngularBasis& b, double mu, double p, double h) {
  const int M = static_cast<int>(U.rows()) - 1;
  const int n = static_cast<int>(U.cols());
  const int N = M * n;
  const int kl = 2 * n - 1, ku = 2 * n - 1;
  const int ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<size_t>(ldab) * N, 0.0);
  auto put = [&](int r, int col, double v) { ab[static_cast<size_t>(col) * ldab + kl + ku + r - col] += v; };
  const double c = h * h / 12.0;
  // dG_i/dU_i = A + diag(mu - (p-1)|U_i|^{p-2})
  // Unknowns are scaled by sqrt(w_j): the nodal A is then similar to the
  // symmetric sqrt(W) V diag(eig) V^T sqrt(W), and the pole nodes with tiny
  // weights no longer wreck the conditioning.
  const Eigen::VectorXd sw = b.weight.cwiseSqrt();
  const Eigen::MatrixXd As = sw.asDiagonal() * b.A * sw.cwiseInverse().asDiagonal();
  auto block = [&](int r_i, int c_i, double coef_delta, double coef_g) {
    if (c_i >= M) return;
    for (int j = 0; j < n; ++j) {
      const int r = r_i * n + j;
      for (int jj = 0; jj < n; ++jj) {
        double v = -coef_g * As(j, jj);
        if (jj == j) v += coef_delta - coef_g * (mu - (p - 1.0) * std::pow(std::abs(U(c_i, j)), p - 2.0));
        put(r, c_i * n + jj, v);
      }
    }
  };
  for (int i = 0; i < M; ++i) {
    if (i == 0) {
      block(0, 0, -2.0, 10.0 * c);
      block(0, 1, 2.0, 2.0 * c);
    } else {
      block(i, i - 1, 1.0, c);
      block(i, i, -2.0, 10.0 * c);
      block(i, i + 1, 1.0, c);
    }
  }
  std::vector<double> rhs(N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < n; ++j) rhs[i * n + j] = -sw(j) * F(i, j);
  std::vector<int> ipiv(N);
  int info = 0;
  // unblocked factorization: the blocked dgbtrf of the system OpenBLAS is
  // inaccurate once kl exceeds its 64-column block
  dgbtf2_(&N, &N, &kl, &ku, ab.data(), &ldab, ipiv.data(), &info);
  if (info != 0) throw solver_error("Newton Jacobian is singular (info " + std::to_string(info) + ")");
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', N, kl, ku, 1, ab.data(), ldab, ipiv.data(), rhs.data(), N);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M + 1, n);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = rhs[i * n + j] / sw(j);
  return D;
}

/// Linear part P = -D2 + A + mu with the second-order symmetric stencil,
/// inverted mode by mode in the zonal basis.
struct DescentOperator {
  const AngularBasis* b;
  double mu, h;
  int M;
  Eigen::VectorXd ws;  // trapezoid weights folded on the half line

  Eigen::MatrixXd apply(const Eigen::MatrixXd& U) const {
    Eigen::MatrixXd R = U * b->A.transpose() + mu * U;
    const double ih2 = 1.0 / (h * h);
    R.row(0) += ih2 * (2.0 * U.row(0) - 2.0 * U.row(1));
    for (int i = 1; i < M; ++i) R.row(i) += ih2 * (2.0 * U.row(i) - U.row(i - 1) - U.row(i + 1));
    R.row(M).setZero();
    return R;
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& R) const {
    const Eigen::MatrixXd C = b->to_modal(R);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(M + 1, b->n);
    const double ih2 = 1.0 / (h * h);
    for (int k = 0; k < b->n; ++k) {
      std::vector<double> dl(M - 1, -ih2), dd(M, 2.0 * ih2 + b->eig(k) + mu), du(M - 1, -ih2), x(M);
      du[0] = -2.0 * ih2;
      for (int i = 0; i < M; ++i) x[i] = C(i, k);
      if (LAPACKE_dgtsv(LAPACK_COL_MAJOR, M, 1, dl.data(), dd.data(), du.data(), x.data(), M) != 0)
        throw solver_error("descent operator is singular");
      for (int i = 0; i < M; ++i) X(i, k) = x[i];
    }
    return b->to_nodal(X);
  }

  double dot(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) const {
    double acc = 0.0;
    for (int i = 0; i <= M; ++i) acc += ws(i) * (U.row(i).cwiseProduct(V.row(i)) * b->weight)(0);
    return acc;
  }

  double lp(const Eigen::MatrixXd& U, double p) const {
    double acc = 0.0;
    for (int i = 0; i <= M; ++i)
      for (int j = 0; j < b->n; ++j) acc += ws(i) * b->weight(j) * std::pow(std::abs(U(i, j)), p);
    return acc;
  }
};

inline DescentOperator make_descent_operator(const CylinderGrid& g, const AngularBasis& b, double mu) {
  DescentOperator op{&b, mu, g.h(), g.half(), Eigen::VectorXd::Constant(g.half() + 1, 2.0 * g.h())};
  op.ws(0) = g.h();
  op.ws(g.half()) = 0.0;
  return op;
}

/// Normalized nonlinear inverse iteration v = P^{-1}(u_+^{p-1}), u <- v/||v||_p.
/// The quotient <u,Pu>/||u||_p^2 is non-increasing along the iteration.
inline Eigen::MatrixXd descent(Eigen::MatrixXd U, const CylinderGrid& g, const AngularBasis& b,
                               double mu, double p, const SolveOptions& opt, SolveStats& st) {
  const auto op = make_descent_operator(g, b, mu);
  auto quotient = [&](const Eigen::MatrixXd& X) {
    return op.dot(X, op.apply(X)) / std::pow(op.lp(X, p), 2.0 / p);
  };
  U = U.cwiseMax(0.0);
  U /= std::pow(op.lp(U, p), 1.0 / p);
  double q = quotient(U);
  st.descent_energy.push_back(q);
  for (int it = 0; it < opt.max_descent; ++it) {
    Eigen::MatrixXd R = U.array().pow(p - 1.0).matrix();
    R.row(g.half()).setZero();
    Eigen::MatrixXd V = op.solve(R);
    const int neg = static_cast<int>((V.array() < 0.0).count());
    if (neg > 0) {
      st.clipped += neg;
      V = V.cwiseMax(0.0);
    }
    const double norm = std::pow(op.lp(V, p), 1.0 / p);
    if (!(norm > 0.0)) throw solver_error("descent collapsed to the zero function");
    V /= norm;
    const double qn = quotient(V);
    st.descent_energy.push_back(qn);
    ++st.descent_iterations;
    U = V;
    const bool done = std::abs(q - qn) <= opt.descent_tol * qn;
    q = qn;
    if (done) break;
  }
  // scale so that P U = U^{p-1} in the quadratic-form sense
  return U * std::pow(q, 1.0 / (p - 2.0));
}

}  // namespace detail

/// Newton iteration on the Numerov residual, optionally preceded by descent.
inline BranchPoint solve_el(double mu, double p, int d, const CylinderField& seed,
                            const AngularBasis& basis, const SolveOptions& opt = {}) {
  detail::require(mu > 0.0, "solve_el requires mu > 0");
  detail::require(p > 2.0 && p < critical_exponent(d), "solve_el requires 2 < p < 2*");
  const auto& g = seed.grid;
  detail::require(g.d == d && basis.n == g.n_zeta && basis.d == d, "seed grid does not match basis");
  if (!(seed.values.maxCoeff() > 0.0)) throw domain_error("solve_el: seed must be positive somewhere");
  const double h = g.h();
  const int M = g.half();
  BranchPoint bp;
  bp.mu = mu;
  Eigen::MatrixXd U = seed.values;
  U.row(M).setZero();
  if (opt.descent_first) U = detail::descent(U, g, basis, mu, p, opt, bp.stats);
  const double initial_max = U.maxCoeff();

  Eigen::MatrixXd F = detail::numerov_residual(U, basis, mu, p, h);
  double res = F.cwiseAbs().maxCoeff() / detail::residual_scale(U, mu, p, h);
  std::vector<double> history{res};
  for (int it = 0; it < opt.max_newton && !(res < opt.tol); ++it) {
    const Eigen::MatrixXd D = detail::newton_direction(U, F, basis, mu, p, h);
    double lambda = 1.0;
    Eigen::MatrixXd Un;
    double resn = 0.0;
    Eigen::MatrixXd Fn;
    for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
      Un = U + lambda * D;
      // significant negative parts are clipped; small negatives at roundoff
      // and ringing level (Numerov tails of stiff angular modes, Gibbs in zeta)
      // are left to the iteration and zeroed after convergence
      const double floor = -1e-6 * Un.maxCoeff();
      const int neg = static_cast<int>((Un.array() < floor).count());
      if (neg > 0) {
        bp.stats.clipped += neg;
        Un = Un.cwiseMax(0.0);
      }
      // the full step of Newton toward u = 0 shrinks the field by orders of magnitude
      if (ls == 0 && !(Un.maxCoeff() > 1e-3 * U.maxCoeff()))
        throw solver_error("Newton converged to the zero solution");
      if (!(Un.maxCoeff() > 1e-8 * initial_max)) continue;
      Fn = detail::numerov_residual(Un, basis, mu, p, h);
      resn = Fn.cwiseAbs().maxCoeff() / detail::residual_scale(Un, mu, p, h);
      if (std::isfinite(resn) && resn < res) break;
    }
    ++bp.stats.newton_iterations;
    if (!(Un.maxCoeff() > 1e-8 * initial_max)) throw solver_error("Newton converged to the zero solution");
    if (!std::isfinite(resn)) throw solver_error("Newton produced non-finite values");
    U = Un;
    F = Fn;
    res = resn;
    history.push_back(res);
    // stagnation: less than a factor 2 gained over the last six steps
    const auto k = history.size();
    if (k > 6 && res > 0.5 * history[k - 7]) break;
  }
  if (!(res < opt.tol))
    throw solver_error("Newton did not converge at mu = " + std::to_string(mu) +
                       " (relative residual " + std::to_string(res) + ")");
  if (U.maxCoeff() < 1e-6 * initial_max) throw solver_error("Newton converged to the zero solution");
  if ((U.array() < 0.0).any()) {
    U = U.cwiseMax(0.0);
    res = detail::numerov_residual(U, basis, mu, p, h).cwiseAbs().maxCoeff() /
          detail::residual_scale(U, mu, p, h);
  }

  bp.field = CylinderField{g, U};
  bp.residual_norm = res;
  const auto I = field_integrals(bp.field, basis, p);
  bp.tau = I.grad2 / I.mass2;
  bp.nu = I.mass2 / std::pow(I.massp, 2.0 / p);
  bp.q = q_energy(I, mu, p);
  bp.f1_amplitude = std::sqrt(I.harmonic1 / I.mass2);
  bp.symmetric = std::sqrt(I.nonradial / I.mass2) < 1e-8;
  return bp;
}

/// Seed u_{mu,*} + eps phi_1 f_1 + eps^2 psi from the expansion (one-sided, mu > mu_FS).
inline CylinderField ansatz_field(const AnsatzFunction& a, const CylinderGrid& g, const AngularBasis& b) {
  return sample_field(g, b, [&](double s, double z) { return std::max(0.0, a(s, z)); });
}

struct StepPolicy {
  double step = 0.05;       // additive step in mu, or relative step if geometric
  bool geometric = false;
  int max_halvings = 6;
  double first_offset = 0.0;  // first non-symmetric mu = mu_FS + first_offset (0: one step);
                              // the step then doubles back up to `step`
};

struct Branch {
  double p = 0.0;
  int d = 0;
  std::vector<BranchPoint> points;
  double mu_bifurcation_estimate = 0.0;
  bool truncated = false;
  std::string diagnostic;
};

/// Location of the bifurcation from the f_1 amplitude: a^2 is linear in mu
/// near mu_FS; fitted on up to the first four non-symmetric points.
inline double estimate_bifurcation(const std::vector<BranchPoint>& pts) {
  std::vector<const BranchPoint*> ns;
  for (const auto& q : pts)
    if (!q.symmetric) ns.push_back(&q);
  if (ns.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const size_t k = std::min<size_t>(ns.size(), ns.size() >= 4 ? 4 : ns.size());
  if (k >= 3) {
    Eigen::MatrixXd X(k, 3);
    Eigen::VectorXd y(k);
    for (size_t i = 0; i < k; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = ns[i]->mu;
      X(i, 2) = ns[i]->mu * ns[i]->mu;
      y(i) = ns[i]->f1_amplitude * ns[i]->f1_amplitude;
    }
    const Eigen::Vector3d c = X.colPivHouseholderQr().solve(y);
    // Newton from the linear root toward the nearest quadratic root
    double m = ns[0]->mu - y(0) * (ns[1]->mu - ns[0]->mu) / (y(1) - y(0));
    for (int it = 0; it < 20; ++it) m -= (c(0) + c(1) * m + c(2) * m * m) / (c(1) + 2 * c(2) * m);
    return m;
  }
  const double y0 = ns[0]->f1_amplitude * ns[0]->f1_amplitude, y1 = ns[1]->f1_amplitude * ns[1]->f1_amplitude;
  return ns[0]->mu - y0 * (ns[1]->mu - ns[0]->mu) / (y1 - y0);
}

struct ContinuationOptions {
  SolveOptions solve;
  int n_zeta = 0;            // 0: default_n_zeta(mu, p, d, zeta_factor) at each point
  double zeta_factor = 7.0;
  int n_s = 801;
  double s_factor = 20.0;    // S = s_factor / beta(mu)
  std::function<void(const BranchPoint&)> on_point;  // progress hook
};

/// Continue the non-symmetric branch from mu_start to mu_end. Points with
/// mu <= mu_FS are symmetric solutions; the first point past mu_FS is seeded
/// with the expansion ansatz, later points with the previous solution.
inline Branch continue_branch(double mu_start, double mu_end, const StepPolicy& pol, double p, int d,
                              const ContinuationOptions& copt = {}) {
  detail::require(p > 2.0 && p < critical_exponent(d), "continue_branch requires 2 < p < 2*");
  detail::require(mu_end > mu_start && mu_start > 0.0, "continue_branch requires 0 < mu_start < mu_end");
  detail::require(pol.step > 0.0, "step must be positive");
  const double mfs = mu_fs(p, d);
  detail::require(mu_start >= 0.5 * mfs, "mu_start must be at least mu_FS/2");
  Branch br;
  br.p = p;
  br.d = d;
  const auto exp = compute_expansion(p, d);
  auto grid_for = [&](double mu) {
    const double beta = 0.5 * (p - 2.0) * std::sqrt(mu);
    return make_cylinder_grid(copt.s_factor / beta, copt.n_s,
                              copt.n_zeta > 0 ? copt.n_zeta : default_n_zeta(mu, p, d, copt.zeta_factor), d);
  };
  std::optional<BranchPoint> prev;
  std::optional<AngularBasis> prev_basis;
  auto next_mu = [&](double mu, double step) { return pol.geometric ? mu * (1.0 + step) : mu + step; };
  double mu = mu_start;
  double step = pol.step;
  int failures = 0;
  while (mu <= mu_end * (1.0 + 1e-12)) {
    const auto g = grid_for(mu);
    const AngularBasis basis = (prev_basis && prev_basis->n == g.n_zeta) ? *prev_basis
                                                                          : make_angular_basis(d, g.n_zeta);
    CylinderField seed;
    const bool above = mu > mfs * (1.0 + 1e-12);
    if (!above) {
      seed = symmetric_field(g, basis, mu, p);
    } else if (!prev || prev->symmetric) {
      if (!exp.c_pd || *exp.c_pd <= 0.0) {
        br.truncated = true;
        br.diagnostic = "expansion coefficient c_{p,d} is not positive; no ansatz seed";
        break;
      }
      seed = ansatz_field(build_ansatz(mu, p, d, *exp.c_pd, default_chi_grid(p, d)), g, basis);
    } else {
      seed = resample(prev->field, *prev_basis, g, basis);
      seed.values *= std::pow(mu / prev->mu, 1.0 / (p - 2.0));
    }
    try {
      BranchPoint bp = solve_el(mu, p, d, seed, basis, copt.solve);
      if (above && bp.symmetric) {
        SolveOptions o = copt.solve;
        o.descent_first = true;
        bp = solve_el(mu, p, d, seed, basis, o);
        if (bp.symmetric) throw solver_error("collapsed onto the symmetric branch");
      }
      if (copt.on_point) copt.on_point(bp);
      prev = bp;
      prev_basis = basis;
      br.points.push_back(std::move(bp));
      failures = 0;
      step = std::min(pol.step, 2.0 * step);
    } catch (const solver_error& e) {
      if (!prev || ++failures > pol.max_halvings) {
        br.truncated = true;
        br.diagnostic = std::string("branch lost at mu = ") + std::to_string(mu) + ": " + e.what();
        break;
      }
      step *= 0.5;
      mu = next_mu(prev->mu, step);
      continue;
    }
    double nm = next_mu(mu, step);
    if (!above && nm > mfs && pol.first_offset > 0.0) {
      // restart the step ladder near the bifurcation so the amplitude fit
      // sees a few close points
      nm = mfs + pol.first_offset;
      step = pol.geometric ? pol.first_offset / mfs : pol.first_offset;
    }
    if (mu < mu_end && nm > mu_end) nm = mu_end;
    if (nm <= mu) break;
    mu = nm;
  }
  br.mu_bifurcation_estimate = estimate_bifurcation(br.points);
  if (!std::isfinite(br.mu_bifurcation_estimate)) br.mu_bifurcation_estimate = mfs;
  return br;
}

struct CurvePoint {
  double mu, Lambda, J, tau, nu;
  bool symmetric;
};

/// (Lambda^theta, J^theta) along the branch from the solver's tau and nu.
inline std::vector<CurvePoint> reparametrize(const Branch& br, double theta) {
  const double vt = vartheta(br.p, br.d);
  detail::require(theta >= vt - 1e-12 && theta <= 1.0 + 1e-12,
                  "theta must lie in [vartheta(p,d), 1]");
  std::vector<CurvePoint> out;
  for (const auto& q : br.points)
    out.push_back({q.mu, theta * q.mu - (1.0 - theta) * q.tau,
                   q.nu * std::pow(theta, theta) * std::pow(q.mu + q.tau, theta), q.tau, q.nu,
                   q.symmetric});
  return out;
}

/// Closed-form symmetric curve at the same mu values.
inline std::vector<CurvePoint> symmetric_curve(const std::vector<double>& mus, double p, int d, double theta) {
  const ProblemParams pp(d, p, theta);
  std::vector<CurvePoint> out;
  for (double m : mus) {
    const auto s = symmetric_branch(m, pp);
    out.push_back({m, s.lambda_theta, s.j_theta, s.tau_star, s.nu_star, true});
  }
  return out;
}

/// delta^theta = (J^theta)'/(Lambda^theta)' - (J*^theta)'/(Lambda*^theta)' from
/// differences of consecutive non-symmetric points, extrapolated to mu_FS
/// (quadratically when four non-symmetric points are available).
inline double tangency_check(const Branch& br, double theta) {
  const auto c = reparametrize(br, theta);
  std::vector<CurvePoint> ns;
  for (const auto& q : c)
    if (!q.symmetric) ns.push_back(q);
  if (ns.size() < 3) throw domain_error("tangency_check needs at least three non-symmetric points");
  const double p = br.p;
  const double mfs = mu_fs(p, br.d);
  // symmetric slope dJ*/dLambda* along mu
  auto sym_slope = [&](double m) {
    const double a = (2.0 * p * theta - (p - 2.0)) / (p + 2.0);  // dLambda*/dmu
    const double jj = j_star(theta, m, p) * (theta - (p - 2.0) / (2.0 * p)) / m;
    return jj / a;
  };
  std::vector<double> xm, dv;
  for (size_t i = 0; i + 1 < ns.size() && xm.size() < 3; ++i) {
    const double dl = ns[i + 1].Lambda - ns[i].Lambda;
    const double m = 0.5 * (ns[i].mu + ns[i + 1].mu);
    xm.push_back(m);
    dv.push_back((ns[i + 1].J - ns[i].J) / dl - sym_slope(m));
  }
  // Lagrange extrapolation through the (two or three) midpoint values
  double out = 0.0;
  for (size_t i = 0; i < xm.size(); ++i) {
    double l = 1.0;
    for (size_t j = 0; j < xm.size(); ++j)
      if (j != i) l *= (mfs - xm[j]) / (xm[i] - xm[j]);
    out += l * dv[i];
  }
  return out;
}

/// J^theta on the branch minus the symmetric J*^theta at the same Lambda.
inline std::vector<double> branch_offset(const Branch& br, double theta) {
  const auto c = reparametrize(br, theta);
  const double p = br.p;
  std::vector<double> out;
  for (const auto& q : c) {
    const double m = symmetric_mu_from_lambda(theta, q.Lambda, p);
    out.push_back(q.J - j_star(theta, m, p));
  }
  return out;
}

}  // namespace ckn
