#pragma once

// Discretization of functions u(s, zeta) on the cylinder R x S^{d-1} that
// depend on the axial variable s and the polar angle zeta only.
//
// s: uniform grid on [-S, S]; fields are even in s, so only the half grid
//    s_i = i h, i = 0..M (M = (n_s-1)/2) is stored, with u = 0 at s = S.
// zeta: Gauss nodes for the weight sin^{d-2}(zeta), i.e. Gegenbauer nodes in
//    x = cos(zeta). Zonal functions are expanded in the orthonormal
//    polynomials P_k(x); the Laplace-Beltrami operator is diagonal there
//    with eigenvalues -k(k+d-2). Pole regularity is built into the basis.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "ckn/analytic.hpp"
#include "ckn/error.hpp"
#include "ckn/spectral_ode.hpp"

namespace ckn {

/// Quadrature nodes and orthonormal zonal polynomials for dnu on S^{d-1}.
struct AngularBasis {
  int d = 0;
  int n = 0;
  Eigen::VectorXd x;       // cos(zeta_j), decreasing
  Eigen::VectorXd zeta;    // increasing in (0, pi)
  Eigen::VectorXd weight;  // sums to 1
  Eigen::VectorXd eig;     // k (k + d - 2)
  Eigen::VectorXd rec;     // recurrence coefficients b_1..b_n
  Eigen::MatrixXd V;       // V(j, k) = P_k(x_j)
  Eigen::MatrixXd A;       // -Laplace-Beltrami on nodal values

  /// P_0..P_{n-1} at x.
  Eigen::VectorXd polys(double xx) const {
    Eigen::VectorXd P(n);
    P(0) = 1.0;
    if (n > 1) P(1) = xx / rec(0);
    for (int k = 1; k + 1 < n; ++k) P(k + 1) = (xx * P(k) - rec(k - 1) * P(k - 1)) / rec(k);
    return P;
  }

  /// Modal coefficients of nodal values (rows are independent samples).
  Eigen::MatrixXd to_modal(const Eigen::MatrixXd& U) const { return U * weight.asDiagonal() * V; }
  Eigen::MatrixXd to_nodal(const Eigen::MatrixXd& C) const { return C * V.transpose(); }
};

inline AngularBasis make_angular_basis(int d, int n) {
  detail::require(d >= 2, "angular basis requires d >= 2");
  detail::require(n >= 2, "angular basis requires at least two nodes");
  AngularBasis b;
  b.d = d;
  b.n = n;
  const double lam = 0.5 * (d - 2.0);
  b.rec.resize(n);
  for (int k = 1; k <= n; ++k) {
    // Jacobi matrix of the Gegenbauer weight (1-x^2)^{lam-1/2}
    const double num = k * (k + 2.0 * lam - 1.0);
    const double den = 4.0 * (k + lam) * (k + lam - 1.0);
    b.rec(k - 1) = (lam == 0.0 && k == 1) ? std::sqrt(0.5) : std::sqrt(num / den);
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = b.rec(k);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  b.x.resize(n);
  b.weight.resize(n);
  for (int j = 0; j < n; ++j) {
    const int src = n - 1 - j;  // descending x = ascending zeta
    b.x(j) = es.eigenvalues()(src);
    b.weight(j) = es.eigenvectors()(0, src) * es.eigenvectors()(0, src);
  }
  b.weight /= b.weight.sum();
  b.zeta = b.x.array().acos();
  b.V.resize(n, n);
  for (int j = 0; j < n; ++j) b.V.row(j) = b.polys(b.x(j)).transpose();
  b.eig.resize(n);
  for (int k = 0; k < n; ++k) b.eig(k) = k * (k + d - 2.0);
  b.A = b.V * b.eig.asDiagonal() * b.V.transpose() * b.weight.asDiagonal();
  return b;
}

struct CylinderGrid {
  double S = 0.0;
  int n_s = 0;
  int n_zeta = 0;
  int d = 0;

  int half() const { return (n_s - 1) / 2; }  // M
  double h() const { return 2.0 * S / (n_s - 1); }
  double s(int i) const { return i * h(); }
};

inline CylinderGrid make_cylinder_grid(double S, int n_s, int n_zeta, int d) {
  detail::require(S > 0.0, "cylinder half-width must be positive");
  detail::require(n_s >= 9 && n_s % 2 == 1 && ((n_s - 1) / 2) % 2 == 0,
                  "n_s must be odd with (n_s-1)/2 even, and >= 9");
  detail::require(n_zeta >= 2, "n_zeta must be >= 2");
  detail::require(d >= 3, "dimension d must be >= 3");
  return {S, n_s, n_zeta, d};
}

/// S = 20/beta(mu), n_s = 801 and an angular resolution growing like
/// sqrt(mu / (1 - vartheta)). Non-symmetric solutions concentrate at a pole and
/// mu + tau tends to mu / (1 - vartheta) along the branch, so the width of the
/// peak in zeta scales like the inverse square root of that.
inline int default_n_zeta(double mu, double p, int d, double factor = 7.0) {
  const int n = static_cast<int>(std::ceil(factor * std::sqrt(mu / (1.0 - vartheta(p, d)))));
  return std::max(32, n + (n % 2));
}

inline CylinderGrid default_cylinder_grid(double mu, double p, int d, int n_zeta = 0) {
  const double beta = 0.5 * (p - 2.0) * std::sqrt(mu);
  return make_cylinder_grid(20.0 / beta, 801, n_zeta > 0 ? n_zeta : default_n_zeta(mu, p, d), d);
}

/// Composite Simpson weights on the full line, folded onto the half grid.
inline Eigen::VectorXd folded_simpson(const CylinderGrid& g) {
  const auto w = simpson_weights(g.n_s, g.h());
  const int M = g.half();
  Eigen::VectorXd out(M + 1);
  out(0) = w[M];
  for (int i = 1; i <= M; ++i) out(i) = 2.0 * w[M + i];
  return out;
}

/// Even-in-s field sampled on the half grid: values(i, j) = u(s_i, zeta_j).
struct CylinderField {
  CylinderGrid grid;
  Eigen::MatrixXd values;  // (M+1) x n_zeta, last row zero

  double at(int i_full, int j) const {
    const int M = grid.half();
    return values(std::abs(i_full - M), j);
  }

  /// Full (n_s x n_zeta) matrix, row-major in (s, zeta) when flattened row by row.
  Eigen::MatrixXd full_values() const {
    const int M = grid.half();
    Eigen::MatrixXd out(grid.n_s, grid.n_zeta);
    for (int i = 0; i < grid.n_s; ++i) out.row(i) = values.row(std::abs(i - M));
    return out;
  }
};

template <class F>
CylinderField sample_field(const CylinderGrid& g, const AngularBasis& b, F&& f) {
  CylinderField u{g, Eigen::MatrixXd::Zero(g.half() + 1, g.n_zeta)};
  for (int i = 0; i < g.half(); ++i)
    for (int j = 0; j < g.n_zeta; ++j) u.values(i, j) = f(g.s(i), b.zeta(j));
  return u;
}

/// Integrals in the cylinder measure ds x dnu, with gradients from
/// fourth-order differences in s and the spectral operator in zeta.
struct FieldIntegrals {
  double grad2 = 0.0;    // int |grad u|^2
  double ds2 = 0.0;      // int u_s^2
  double dzeta2 = 0.0;   // int |grad_S u|^2
  double mass2 = 0.0;    // int u^2
  double massp = 0.0;    // int |u|^p
  double harmonic1 = 0.0;  // int (f_1 component)^2 ds
  double nonradial = 0.0;  // int |u - mean_zeta u|^2
};

inline FieldIntegrals field_integrals(const CylinderField& u, const AngularBasis& b, double p) {
  const auto& g = u.grid;
  const int M = g.half(), n = g.n_zeta;
  detail::require(b.n == n && b.d == g.d, "angular basis does not match grid");
  const Eigen::VectorXd ws = folded_simpson(g);
  const double h = g.h();
  auto val = [&](int i, int j) {
    const int k = std::abs(i);
    return k > M ? 0.0 : u.values(k, j);
  };
  const Eigen::MatrixXd modal = b.to_modal(u.values);
  const Eigen::MatrixXd AU = u.values * b.A.transpose();
  FieldIntegrals r;
  for (int i = 0; i <= M; ++i) {
    double ds = 0.0, dz = 0.0, m2 = 0.0, mp = 0.0;
    for (int j = 0; j < n; ++j) {
      const double us = (-val(i + 2, j) + 8 * val(i + 1, j) - 8 * val(i - 1, j) + val(i - 2, j)) / (12 * h);
      const double v = u.values(i, j);
      ds += b.weight(j) * us * us;
      dz += b.weight(j) * v * AU(i, j);
      m2 += b.weight(j) * v * v;
      mp += b.weight(j) * std::pow(std::abs(v), p);
    }
    r.ds2 += ws(i) * ds;
    r.dzeta2 += ws(i) * dz;
    r.mass2 += ws(i) * m2;
    r.massp += ws(i) * mp;
    if (n > 1) r.harmonic1 += ws(i) * modal(i, 1) * modal(i, 1);
    r.nonradial += ws(i) * (modal.row(i).squaredNorm() - modal(i, 0) * modal(i, 0));
  }
  r.grad2 = r.ds2 + r.dzeta2;
  return r;
}

/// Q_mu[u] = (int |grad u|^2 + mu int u^2) / ||u||_p^2.
inline double q_energy(const FieldIntegrals& I, double mu, double p) {
  if (!(I.massp > 0.0)) throw domain_error("q_energy: zero field");
  return (I.grad2 + mu * I.mass2) / std::pow(I.massp, 2.0 / p);
}

inline double q_energy(const CylinderField& u, const AngularBasis& b, double mu, double p) {
  return q_energy(field_integrals(u, b, p), mu, p);
}

/// Resample a field onto another grid: spectral interpolation in zeta and
/// cubic Lagrange interpolation in s (even extension, zero beyond S).
inline CylinderField resample(const CylinderField& u, const AngularBasis& from,
                              const CylinderGrid& g, const AngularBasis& to) {
  const int M0 = u.grid.half();
  const double h0 = u.grid.h();
  // angular transfer on the old s grid
  const Eigen::MatrixXd modal = from.to_modal(u.values);
  Eigen::MatrixXd E(from.n, to.n);  // E(k, j) = P_k(x'_j)
  for (int j = 0; j < to.n; ++j) E.col(j) = from.polys(to.x(j));
  const Eigen::MatrixXd ang = modal * E;  // (M0+1) x n'
  auto row = [&](int i) -> Eigen::RowVectorXd {
    const int k = std::abs(i);
    return k > M0 ? Eigen::RowVectorXd::Zero(to.n) : Eigen::RowVectorXd(ang.row(k));
  };
  CylinderField out{g, Eigen::MatrixXd::Zero(g.half() + 1, g.n_zeta)};
  for (int i = 0; i < g.half(); ++i) {
    const double xs = g.s(i) / h0;
    if (xs >= M0) continue;
    const int i0 = static_cast<int>(std::floor(xs)) - 1;
    const double t = xs - i0;
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0, l1 = t * (t - 2) * (t - 3) / 2.0;
    const double l2 = -t * (t - 1) * (t - 3) / 2.0, l3 = t * (t - 1) * (t - 2) / 6.0;
    out.values.row(i) = l0 * row(i0) + l1 * row(i0 + 1) + l2 * row(i0 + 2) + l3 * row(i0 + 3);
  }
  return out;
}

/// Symmetric extremal u_{mu,*} sampled on the grid.
inline CylinderField symmetric_field(const CylinderGrid& g, const AngularBasis& b, double mu, double p) {
  const auto u = symmetric_extremal(mu, p);
  return sample_field(g, b, [&](double s, double) { return u(s); });
}

}  // namespace ckn
