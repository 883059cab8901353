#pragma once

// One-dimensional kernels on a truncated line: Simpson quadrature, Numerov
// solves for the sech-potential equations that appear at second order of the
// bifurcation expansion, and the Poschl-Teller ground energy.

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ckn/analytic.hpp"
#include "ckn/error.hpp"

namespace ckn {

/// Uniform grid on [-S, S] with an odd number of nodes, so s = 0 is a node.
struct LineGrid {
  double half_width = 0.0;
  int n = 0;
  double spacing = 0.0;

  double node(int i) const { return -half_width + i * spacing; }
  int center() const { return n / 2; }
};

inline LineGrid make_line_grid(double half_width, int n) {
  detail::require(half_width > 0.0, "grid half-width must be positive");
  detail::require(n >= 3 && n % 2 == 1, "grid point count must be odd and >= 3");
  return {half_width, n, 2.0 * half_width / (n - 1)};
}

/// Composite Simpson weights for n (odd) equally spaced nodes.
inline std::vector<double> simpson_weights(int n, double h) {
  detail::require(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  w.front() = w.back() = h / 3.0;
  return w;
}

inline double quadrature(const std::vector<double>& samples, const LineGrid& grid) {
  if (static_cast<int>(samples.size()) != grid.n)
    throw domain_error("quadrature: sample count " + std::to_string(samples.size()) +
                       " does not match grid size " + std::to_string(grid.n));
  const auto w = simpson_weights(grid.n, grid.spacing);
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) acc += w[i] * samples[i];
  return acc;
}

template <class F>
std::vector<double> sample(const LineGrid& grid, F&& f) {
  std::vector<double> v(grid.n);
  for (int i = 0; i < grid.n; ++i) v[i] = f(grid.node(i));
  return v;
}

/// Lowest eigenvalue of -d^2/ds^2 - U0 sech^2(s) on the line.
inline double pt_ground_energy(double U0) {
  detail::require(U0 > 0.0, "Poschl-Teller depth U0 must be positive");
  return 0.5 * std::sqrt(1.0 + 4.0 * U0) - 0.5 - U0;
}

/// Depth 2p(p-1)/(p-2)^2 of the rescaled linearized potential.
inline double pt_depth(double p) { return 2.0 * p * (p - 1.0) / ((p - 2.0) * (p - 2.0)); }

/// sigma(p,d) = lambda_0 + 4 mu_2 / (mu_FS (p-2)^2), mu_2 = mu_FS + 2d.
inline double sigma(double p, int d) {
  detail::require(p > 2.0, "sigma requires p > 2");
  detail::require(d >= 2, "sigma requires d >= 2");
  const double mfs = mu_fs(p, d);
  const double mu2 = mfs + 2.0 * d;
  return pt_ground_energy(pt_depth(p)) + 4.0 * mu2 / (mfs * (p - 2.0) * (p - 2.0));
}

enum class ChiKind { chi_0_pm1, chi_0_2pm3, chi_2_2pm3 };

inline std::string to_string(ChiKind k) {
  switch (k) {
    case ChiKind::chi_0_pm1: return "chi_0_pm1";
    case ChiKind::chi_0_2pm3: return "chi_0_2pm3";
    case ChiKind::chi_2_2pm3: return "chi_2_2pm3";
  }
  return "?";
}

inline ChiKind chi_kind_from_string(const std::string& s) {
  if (s == "chi_0_pm1") return ChiKind::chi_0_pm1;
  if (s == "chi_0_2pm3") return ChiKind::chi_0_2pm3;
  if (s == "chi_2_2pm3") return ChiKind::chi_2_2pm3;
  throw domain_error("unknown chi kind '" + s + "' (expected chi_0_pm1, chi_0_2pm3, chi_2_2pm3)");
}

/// Sampled solution of one of the three second-order equations. `grid` is in
/// the cylinder variable s at mu = mu_FS; values hold chi(beta s), where chi
/// solves the rescaled equation in sigma = beta s.
struct ChiProfile {
  ChiKind kind{};
  double p = 0.0;
  int d = 0;
  double beta = 0.0;
  LineGrid grid;
  std::vector<double> values;
  double residual_norm = 0.0;

  /// The same nodes expressed in the rescaled variable.
  LineGrid rescaled_grid() const { return make_line_grid(beta * grid.half_width, grid.n); }

  /// int chi(sigma) w(sigma)^q dsigma on the rescaled line.
  double moment(double q) const {
    const LineGrid g = rescaled_grid();
    std::vector<double> f(g.n);
    for (int i = 0; i < g.n; ++i)
      f[i] = values[i] * std::pow(std::cosh(g.node(i)), -2.0 * q / (p - 2.0));
    return quadrature(f, g);
  }

  /// Cubic Lagrange interpolation in the rescaled variable; zero outside the grid.
  double at_rescaled(double sig) const {
    const LineGrid g = rescaled_grid();
    const double x = (sig + g.half_width) / g.spacing;
    if (x <= 0.0 || x >= g.n - 1) return 0.0;
    const int i = std::clamp(static_cast<int>(x) - 1, 0, g.n - 4);
    const double t = x - i;
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0, l1 = t * (t - 2) * (t - 3) / 2.0;
    const double l2 = -t * (t - 1) * (t - 3) / 2.0, l3 = t * (t - 1) * (t - 2) / 6.0;
    return l0 * values[i] + l1 * values[i + 1] + l2 * values[i + 2] + l3 * values[i + 3];
  }
};

/// Default grid: S = 30/beta with beta = (p-2) sqrt(mu_FS)/2, n = 4001.
inline LineGrid default_chi_grid(double p, int d, int n = 4001) {
  const double beta = 0.5 * (p - 2.0) * std::sqrt(mu_fs(p, d));
  return make_line_grid(30.0 / beta, n);
}

namespace detail {

/// Numerov discretization of -chi'' + V chi = f on a symmetric grid for an
/// even solution with chi(+-L) = 0. Only the half line s >= 0 is solved (the
/// reflection removes the odd translation mode of the linearized operators),
/// using LAPACK's pivoted tridiagonal routine; the result is mirrored.
inline std::vector<double> numerov_even(const std::vector<double>& V, const std::vector<double>& f,
                                        double h, double* residual = nullptr) {
  const int n = static_cast<int>(V.size());
  const int c0 = n / 2;
  const int m = n - 1 - c0;
  if (m < 2) throw domain_error("Numerov solve needs at least two interior nodes");
  const double c = h * h / 12.0;
  std::vector<double> dl(m - 1), dd(m), du(m - 1), rhs(m);
  for (int k = 0; k < m; ++k) {
    const int i = c0 + k;
    dd[k] = -2.0 - 10.0 * c * V[i];
    if (k == 0) {
      du[0] = 2.0 * (1.0 - c * V[i + 1]);
      rhs[0] = -c * (2.0 * f[i + 1] + 10.0 * f[i]);
      continue;
    }
    dl[k - 1] = 1.0 - c * V[i - 1];
    if (k < m - 1) du[k] = 1.0 - c * V[i + 1];
    rhs[k] = -c * (f[i - 1] + 10.0 * f[i] + f[i + 1]);
  }
  auto dl0 = dl, dd0 = dd, du0 = du, rhs0 = rhs;
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, m, 1, dl.data(), dd.data(), du.data(),
                                        rhs.data(), m);
  if (info != 0)
    throw solver_error("Numerov system is singular (grid too coarse or domain too short)");
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < m; ++k) x[c0 + k] = x[c0 - k] = rhs[k];
  if (residual) {
    double rmax = 0.0, bmax = 0.0;
    for (int k = 0; k < m; ++k) {
      double r = dd0[k] * rhs[k] - rhs0[k];
      if (k > 0) r += dl0[k - 1] * rhs[k - 1];
      if (k < m - 1) r += du0[k] * rhs[k + 1];
      rmax = std::max(rmax, std::abs(r));
      bmax = std::max(bmax, std::abs(rhs0[k]));
    }
    *residual = bmax > 0.0 ? rmax / bmax : rmax;
  }
  return x;
}

}  // namespace detail

inline ChiProfile solve_chi(ChiKind kind, double p, int d, const LineGrid& grid) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p < critical_exponent(d), "solve_chi requires 2 < p < 2*");
  ChiProfile out;
  out.kind = kind;
  out.p = p;
  out.d = d;
  out.grid = grid;
  const double mfs = mu_fs(p, d);
  out.beta = 0.5 * (p - 2.0) * std::sqrt(mfs);
  const LineGrid g = out.rescaled_grid();
  const double q2 = (p - 2.0) * (p - 2.0);
  const double shift =
      kind == ChiKind::chi_2_2pm3 ? 4.0 * (mfs + 2.0 * d) / (mfs * q2) : 4.0 / q2;
  const double depth = pt_depth(p);
  std::vector<double> V(g.n), f(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double sech = 1.0 / std::cosh(g.node(i));
    const double w = std::pow(sech, 2.0 / (p - 2.0));
    V[i] = shift - depth * sech * sech;
    f[i] = kind == ChiKind::chi_0_pm1 ? -std::pow(w, p - 1.0) : std::pow(w, 2.0 * p - 3.0);
  }
  out.values = detail::numerov_even(V, f, g.spacing, &out.residual_norm);
  return out;
}

inline double chi_0_pm1_exact(double sig, double p) {
  return (p - 2.0) / (2.0 * p) * std::pow(std::cosh(sig), -2.0 / (p - 2.0));
}

inline double chi_0_2pm3_exact(double sig, double p) {
  const double w = std::pow(std::cosh(sig), -2.0 / (p - 2.0));
  return -(p - 2.0) * (2.0 * w - std::pow(w, p - 1.0)) / (4.0 * (p - 1.0));
}

}  // namespace ckn
